use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TauGrid;
use crate::numeric::trapezoid;

/// Fraction of the peak below which local maxima are ignored.
pub const MAXIMA_FLOOR: f64 = 0.05;
/// Fraction of the peak that delimits the "top" of a pulse for flatness.
pub const TOP_LEVEL: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseMetrics {
    pub peak: f64,
    pub fwhm: f64,
    pub energy: f64,
    pub centroid: f64,
    pub n_local_maxima: usize,
    pub top_flatness: f64,
}

/// Shape metrics of a non-negative envelope. The width uses the outermost
/// pair of half-maximum crossings, so multi-peak pulses get one overall width.
pub fn pulse_metrics(amplitude: &[f64], grid: &TauGrid) -> Result<PulseMetrics> {
    if amplitude.len() != grid.n_tau {
        return Err(Error::LengthMismatch {
            expected: grid.n_tau,
            actual: amplitude.len(),
        });
    }
    let dt = grid.dt();
    let peak = amplitude.iter().copied().fold(0.0_f64, f64::max);
    if !peak.is_finite() || peak <= 0.0 {
        return Err(Error::DegeneratePulse(format!("pulse peak is {peak}")));
    }

    let (left, right) = half_max_crossings(amplitude, grid, peak);

    let intensity: Vec<f64> = amplitude.iter().map(|a| a * a).collect();
    let energy = trapezoid(&intensity, dt);
    let weighted: Vec<f64> = intensity
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.tau(i))
        .collect();
    let centroid = if energy > 0.0 {
        trapezoid(&weighted, dt) / energy
    } else {
        grid.tau(argmax(amplitude))
    };

    Ok(PulseMetrics {
        peak,
        fwhm: right - left,
        energy,
        centroid,
        n_local_maxima: count_local_maxima(amplitude, MAXIMA_FLOOR * peak),
        top_flatness: top_flatness(amplitude, peak),
    })
}

pub(crate) fn argmax(y: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in y.iter().enumerate() {
        if v > y[best] {
            best = i;
        }
    }
    best
}

fn half_max_crossings(y: &[f64], grid: &TauGrid, peak: f64) -> (f64, f64) {
    let half = 0.5 * peak;
    let n = y.len();
    let first = y.iter().position(|&v| v >= half).unwrap_or(0);
    let last = y.iter().rposition(|&v| v >= half).unwrap_or(n - 1);
    let left = if first == 0 {
        grid.tau(0)
    } else {
        let (a, b) = (y[first - 1], y[first]);
        grid.tau(first - 1) + (half - a) / (b - a) * grid.dt()
    };
    let right = if last == n - 1 {
        grid.tau(n - 1)
    } else {
        let (a, b) = (y[last], y[last + 1]);
        grid.tau(last) + (a - half) / (a - b) * grid.dt()
    };
    (left, right)
}

/// Local maxima above `floor`; a plateau counts once.
pub fn count_local_maxima(y: &[f64], floor: f64) -> usize {
    let n = y.len();
    let mut count = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        let rises = i == 0 || y[i - 1] < y[i];
        let falls = j == n - 1 || y[j + 1] < y[j];
        if rises && falls && y[i] > floor {
            count += 1;
        }
        i = j + 1;
    }
    count
}

fn top_flatness(y: &[f64], peak: f64) -> f64 {
    let top: Vec<f64> = y
        .iter()
        .copied()
        .filter(|&v| v >= TOP_LEVEL * peak)
        .collect();
    let mean = top.iter().sum::<f64>() / top.len() as f64;
    let var = top.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / top.len() as f64;
    var.sqrt() / mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{sample_envelope, EnvelopeSpec};

    fn grid() -> TauGrid {
        TauGrid::new(-40.0, 40.0, 4096).unwrap()
    }

    #[test]
    fn gaussian_fwhm_matches_closed_form() {
        let g = grid();
        let y = sample_envelope(&EnvelopeSpec::gaussian(20.0, 0.0, 10.0), &g).unwrap();
        let m = pulse_metrics(&y, &g).unwrap();
        let exact = 2.0 * 10.0 * 2f64.ln().sqrt();
        assert!((exact - 16.651).abs() < 1e-3);
        assert!((m.fwhm - exact).abs() < 1e-3, "fwhm {}", m.fwhm);
        assert_eq!(m.peak, y.iter().copied().fold(0.0, f64::max));
        assert_eq!(m.n_local_maxima, 1);
        assert!(m.centroid.abs() < 1e-9);
        // ∫ 400 exp(−2τ²/100) dτ = 400 · 10 · sqrt(π/2)
        let energy = 400.0 * 10.0 * (std::f64::consts::PI / 2.0).sqrt();
        assert!((m.energy - energy).abs() / energy < 1e-6);
    }

    #[test]
    fn constant_sequence() {
        let g = grid();
        let y = vec![5.0; g.n_tau];
        let m = pulse_metrics(&y, &g).unwrap();
        assert_eq!(m.n_local_maxima, 1);
        assert_eq!(m.top_flatness, 0.0);
        assert_eq!(m.fwhm, 80.0);
    }

    #[test]
    fn two_separated_gaussians_have_two_maxima() {
        let g = grid();
        let spec = EnvelopeSpec::Sum {
            parts: vec![
                EnvelopeSpec::gaussian(5.0, -3.0, 1.0),
                EnvelopeSpec::gaussian(5.0, 3.0, 1.0),
            ],
        };
        let y = sample_envelope(&spec, &g).unwrap();
        let m = pulse_metrics(&y, &g).unwrap();
        assert_eq!(m.n_local_maxima, 2);
        // outermost crossings: 6 + one single-peak FWHM
        assert!((m.fwhm - (6.0 + 2.0 * 2f64.ln().sqrt())).abs() < 1e-3);
    }

    #[test]
    fn zero_pulse_is_degenerate() {
        let g = grid();
        assert!(matches!(
            pulse_metrics(&vec![0.0; g.n_tau], &g),
            Err(Error::DegeneratePulse(_))
        ));
        assert!(matches!(
            pulse_metrics(&[1.0; 3], &g),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn energy_is_additive_for_disjoint_pulses() {
        let g = grid();
        let a = sample_envelope(&EnvelopeSpec::gaussian(3.0, -15.0, 1.0), &g).unwrap();
        let b = sample_envelope(&EnvelopeSpec::gaussian(7.0, 15.0, 2.0), &g).unwrap();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let e = |y: &[f64]| pulse_metrics(y, &g).unwrap().energy;
        assert!((e(&ab) - e(&a) - e(&b)).abs() < 1e-9 * e(&ab));
    }

    #[test]
    fn plateau_maxima_count_once() {
        assert_eq!(count_local_maxima(&[0.0, 1.0, 1.0, 1.0, 0.0], 0.0), 1);
        assert_eq!(count_local_maxima(&[0.0, 1.0, 0.5, 1.0, 0.0], 0.0), 2);
        assert_eq!(
            count_local_maxima(&[0.0, 1.0, 0.5, 0.01, 0.02, 0.0], 0.05),
            1
        );
    }
}
