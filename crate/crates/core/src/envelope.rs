//! Declarative input envelopes and their sampling on a [`TauGrid`].
//!
//! Building blocks such as [`EnvelopeSpec::TanhStep`] and
//! [`EnvelopeSpec::LinearRamp`] do not vanish at both ends on their own and
//! may carry signed levels; they are meant to be combined in a
//! [`EnvelopeSpec::Sum`]. Only the sampled total has to be non-negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TauGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeSpec {
    /// `amplitude · exp(−((τ − center)/width)²)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude · exp(−|(τ − center)/width|^order)`, even `order ≥ 2`.
    Supergaussian {
        amplitude: f64,
        center: f64,
        width: f64,
        order: u32,
    },
    /// Level `g_start` before `t_start`, `g_end` after `t_end`, linear in
    /// between; corners rounded over the `shoulder` time constant.
    LinearRamp {
        g_start: f64,
        g_end: f64,
        t_start: f64,
        t_end: f64,
        shoulder: f64,
    },
    /// `g_low + (g_high − g_low) · (1 + tanh((τ − t_mid)/rise_time)) / 2`.
    TanhStep {
        g_low: f64,
        g_high: f64,
        t_mid: f64,
        rise_time: f64,
    },
    /// Samples on an explicit increasing grid, linearly interpolated and zero
    /// outside it.
    Tabulated {
        tau: Vec<f64>,
        values: Vec<f64>,
    },
    Sum {
        parts: Vec<EnvelopeSpec>,
    },
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEnvelope(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

impl EnvelopeSpec {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        EnvelopeSpec::Gaussian {
            amplitude,
            center,
            width,
        }
    }

    pub fn supergaussian(amplitude: f64, center: f64, width: f64, order: u32) -> Self {
        EnvelopeSpec::Supergaussian {
            amplitude,
            center,
            width,
            order,
        }
    }

    /// Parameter checks (sign of the sampled total is checked at sampling).
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvelopeSpec::Gaussian {
                amplitude,
                center,
                width,
            } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                finite("width", *width)?;
                if *width <= 0.0 {
                    return Err(Error::InvalidEnvelope(format!(
                        "width must be positive, got {width}"
                    )));
                }
            }
            EnvelopeSpec::Supergaussian {
                amplitude,
                center,
                width,
                order,
            } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                finite("width", *width)?;
                if *width <= 0.0 {
                    return Err(Error::InvalidEnvelope(format!(
                        "width must be positive, got {width}"
                    )));
                }
                if *order < 2 || order % 2 != 0 {
                    return Err(Error::InvalidEnvelope(format!(
                        "supergaussian order must be an even integer >= 2, got {order}"
                    )));
                }
            }
            EnvelopeSpec::LinearRamp {
                g_start,
                g_end,
                t_start,
                t_end,
                shoulder,
            } => {
                for (n, v) in [
                    ("g_start", g_start),
                    ("g_end", g_end),
                    ("t_start", t_start),
                    ("t_end", t_end),
                ] {
                    finite(n, *v)?;
                }
                finite("shoulder", *shoulder)?;
                if t_end <= t_start {
                    return Err(Error::InvalidEnvelope(format!(
                        "ramp requires t_end > t_start ({t_end} <= {t_start})"
                    )));
                }
                if *shoulder < 0.0 {
                    return Err(Error::InvalidEnvelope("ramp shoulder must be >= 0".into()));
                }
            }
            EnvelopeSpec::TanhStep {
                g_low,
                g_high,
                t_mid,
                rise_time,
            } => {
                for (n, v) in [
                    ("g_low", g_low),
                    ("g_high", g_high),
                    ("t_mid", t_mid),
                    ("rise_time", rise_time),
                ] {
                    finite(n, *v)?;
                }
                if *rise_time <= 0.0 {
                    return Err(Error::InvalidEnvelope("rise_time must be positive".into()));
                }
            }
            EnvelopeSpec::Tabulated { tau, values } => {
                if tau.len() != values.len() {
                    return Err(Error::InvalidEnvelope(format!(
                        "tabulated envelope has {} times but {} values",
                        tau.len(),
                        values.len()
                    )));
                }
                if tau.len() < 2 {
                    return Err(Error::InvalidEnvelope(
                        "tabulated envelope needs at least 2 samples".into(),
                    ));
                }
                if tau.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidEnvelope(
                        "tabulated samples must be finite".into(),
                    ));
                }
                if tau.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidEnvelope(
                        "tabulated times must be strictly increasing".into(),
                    ));
                }
            }
            EnvelopeSpec::Sum { parts } => {
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Value at a single time, without validation.
    pub fn value_at(&self, tau: f64) -> f64 {
        match self {
            EnvelopeSpec::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let x = (tau - center) / width;
                amplitude * (-x * x).exp()
            }
            EnvelopeSpec::Supergaussian {
                amplitude,
                center,
                width,
                order,
            } => {
                let x = ((tau - center) / width).abs();
                amplitude * (-x.powi(*order as i32)).exp()
            }
            EnvelopeSpec::LinearRamp {
                g_start,
                g_end,
                t_start,
                t_end,
                shoulder,
            } => {
                let span = t_end - t_start;
                let frac = if *shoulder == 0.0 {
                    ((tau - t_start) / span).clamp(0.0, 1.0)
                } else {
                    let s = *shoulder;
                    s * (softplus((tau - t_start) / s) - softplus((tau - t_end) / s)) / span
                };
                g_start + (g_end - g_start) * frac
            }
            EnvelopeSpec::TanhStep {
                g_low,
                g_high,
                t_mid,
                rise_time,
            } => g_low + (g_high - g_low) * 0.5 * (1.0 + ((tau - t_mid) / rise_time).tanh()),
            EnvelopeSpec::Tabulated { tau: ts, values } => {
                crate::numeric::interp_sorted(ts, values, tau, 0.0)
            }
            EnvelopeSpec::Sum { parts } => parts.iter().map(|p| p.value_at(tau)).sum(),
        }
    }

    /// Upper bound on the magnitude of any sampled value; sets the rounding
    /// scale for the sign check.
    fn magnitude(&self) -> f64 {
        match self {
            EnvelopeSpec::Gaussian { amplitude, .. }
            | EnvelopeSpec::Supergaussian { amplitude, .. } => amplitude.abs(),
            EnvelopeSpec::LinearRamp { g_start, g_end, .. } => g_start.abs().max(g_end.abs()),
            EnvelopeSpec::TanhStep { g_low, g_high, .. } => g_low.abs().max(g_high.abs()),
            EnvelopeSpec::Tabulated { values, .. } => crate::numeric::max_abs(values),
            EnvelopeSpec::Sum { parts } => parts.iter().map(|p| p.magnitude()).sum(),
        }
    }
}

/// Sample `spec` on `grid`. Totals that are negative beyond rounding are
/// rejected; rounding-level negatives from cancelling parts are clamped to 0.
pub fn sample_envelope(spec: &EnvelopeSpec, grid: &TauGrid) -> Result<Vec<f64>> {
    spec.validate()?;
    grid.validate()?;
    let floor = -1e-12 * spec.magnitude();
    let mut out = Vec::with_capacity(grid.n_tau);
    for i in 0..grid.n_tau {
        let tau = grid.tau(i);
        let v = spec.value_at(tau);
        if !v.is_finite() {
            return Err(Error::InvalidEnvelope(format!(
                "non-finite sample at tau = {tau}"
            )));
        }
        if v < floor {
            return Err(Error::InvalidEnvelope(format!(
                "negative envelope value {v:.6e} at tau = {tau}"
            )));
        }
        out.push(v.max(0.0));
    }
    Ok(out)
}
