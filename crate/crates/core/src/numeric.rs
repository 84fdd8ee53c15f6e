//! Small numerical kernels shared by the solvers: quadrature, differencing,
//! interpolation and bracketed bisection.

use num_complex::Complex64 as C64;

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(y: &[f64], dx: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => dx * (0.5 * (y[0] + y[n - 1]) + y[1..n - 1].iter().sum::<f64>()),
    }
}

/// Running trapezoidal integral, starting at zero.
pub fn cumulative_trapezoid(y: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    for (i, &v) in y.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dx * (y[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Second-order centered differences, first-order one-sided at the ends.
pub fn centered_diff(y: &[f64], dx: f64) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (y[1] - y[0]) / dx,
            i if i == n - 1 => (y[n - 1] - y[n - 2]) / dx,
            i => (y[i + 1] - y[i - 1]) / (2.0 * dx),
        })
        .collect()
}

pub fn centered_diff_complex(y: &[C64], dx: f64) -> Vec<C64> {
    let n = y.len();
    if n < 2 {
        return vec![C64::new(0.0, 0.0); n];
    }
    (0..n)
        .map(|i| match i {
            0 => (y[1] - y[0]) / dx,
            i if i == n - 1 => (y[n - 1] - y[n - 2]) / dx,
            i => (y[i + 1] - y[i - 1]) / (2.0 * dx),
        })
        .collect()
}

/// Linear interpolation of uniformly sampled data at fractional index `x`
/// (clamped to the sample range).
pub fn interp_uniform(y: &[f64], x: f64) -> f64 {
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    if x <= 0.0 {
        return y[0];
    }
    let last = (n - 1) as f64;
    if x >= last {
        return y[n - 1];
    }
    let i = x.floor() as usize;
    let f = x - i as f64;
    y[i] + f * (y[i + 1] - y[i])
}

/// Linear interpolation on a strictly increasing abscissa; `outside` is
/// returned beyond either end.
pub fn interp_sorted(xs: &[f64], ys: &[f64], x: f64, outside: f64) -> f64 {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] || x.is_nan() {
        return outside;
    }
    let j = xs.partition_point(|&v| v < x);
    if j == 0 {
        return ys[0];
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let f = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[j - 1] + f * (ys[j] - ys[j - 1])
}

/// Bisection for a root of `f` on `[lo, hi]`. Requires a sign change
/// (or a zero at an endpoint); returns `None` otherwise.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= tol || mid <= lo || mid >= hi {
            return Some(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Relative discrete L2 distance `|a - b| / |b|` (0 when both vanish).
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

pub fn rel_l2_complex(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

pub fn max_abs(y: &[f64]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_exact_for_linear() {
        let y: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * 0.1 + 1.0).collect();
        // integral of 2x + 1 over [0, 1]
        assert!((trapezoid(&y, 0.1) - 2.0).abs() < 1e-14);
        let c = cumulative_trapezoid(&y, 0.1);
        assert_eq!(c[0], 0.0);
        assert!((c[10] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn centered_diff_of_quadratic_is_exact_inside() {
        let dx = 0.25;
        let y: Vec<f64> = (0..9).map(|i| (i as f64 * dx).powi(2)).collect();
        let d = centered_diff(&y, dx);
        for (i, di) in d.iter().enumerate().take(8).skip(1) {
            assert!((di - 2.0 * i as f64 * dx).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_helpers() {
        let y = [0.0, 10.0, 20.0];
        assert_eq!(interp_uniform(&y, 0.5), 5.0);
        assert_eq!(interp_uniform(&y, -1.0), 0.0);
        assert_eq!(interp_uniform(&y, 7.0), 20.0);
        let xs = [0.0, 1.0, 3.0];
        assert_eq!(interp_sorted(&xs, &y, 2.0, -1.0), 15.0);
        assert_eq!(interp_sorted(&xs, &y, 3.5, -1.0), -1.0);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }
}
