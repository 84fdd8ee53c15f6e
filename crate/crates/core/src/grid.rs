//! Sampling grids in retarded time (units of the probe duration) and in
//! scaled depth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_TAU_SAMPLES: usize = 16;

/// Uniform retarded-time grid `tau_min ..= tau_max` with `n_tau` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_tau: usize,
}

impl TauGrid {
    pub fn new(tau_min: f64, tau_max: f64, n_tau: usize) -> Result<Self> {
        let g = TauGrid {
            tau_min,
            tau_max,
            n_tau,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min.is_finite() && self.tau_max.is_finite()) {
            return Err(Error::InvalidGrid("tau bounds must be finite".into()));
        }
        if self.tau_max <= self.tau_min {
            return Err(Error::InvalidGrid(format!(
                "tau_max ({}) must exceed tau_min ({})",
                self.tau_max, self.tau_min
            )));
        }
        if self.n_tau < MIN_TAU_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "n_tau = {} is below the minimum of {MIN_TAU_SAMPLES}",
                self.n_tau
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.n_tau - 1) as f64
    }

    #[inline]
    pub fn tau(&self, i: usize) -> f64 {
        if i + 1 == self.n_tau {
            self.tau_max
        } else {
            self.tau_min + i as f64 * self.dt()
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.n_tau).map(|i| self.tau(i)).collect()
    }

    /// Fractional sample index of `tau` (may fall outside `0..n_tau`).
    #[inline]
    pub fn index_of(&self, tau: f64) -> f64 {
        (tau - self.tau_min) / self.dt()
    }

    /// The grid with the spacing halved (`2 n - 1` samples, same window).
    pub fn refined(&self) -> TauGrid {
        TauGrid {
            n_tau: 2 * self.n_tau - 1,
            ..*self
        }
    }
}

/// Depth march `0 ..= zeta_max` in `n_zeta` uniform steps, with a snapshot
/// recorded every `snapshot_stride` steps (and always at the end).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZetaGrid {
    pub zeta_max: f64,
    pub n_zeta: usize,
    pub snapshot_stride: usize,
}

impl ZetaGrid {
    pub fn new(zeta_max: f64, n_zeta: usize, snapshot_stride: usize) -> Result<Self> {
        let g = ZetaGrid {
            zeta_max,
            n_zeta,
            snapshot_stride,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta_max.is_finite() && self.zeta_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "zeta_max must be positive, got {}",
                self.zeta_max
            )));
        }
        if self.n_zeta == 0 {
            return Err(Error::InvalidGrid("n_zeta must be at least 1".into()));
        }
        if self.snapshot_stride == 0 || self.snapshot_stride > self.n_zeta {
            return Err(Error::InvalidGrid(format!(
                "snapshot_stride must lie in 1..={}, got {}",
                self.n_zeta, self.snapshot_stride
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dzeta(&self) -> f64 {
        self.zeta_max / self.n_zeta as f64
    }

    /// Step indices at which snapshots are taken, starting with 0 and ending
    /// with `n_zeta`.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = (0..=self.n_zeta).step_by(self.snapshot_stride).collect();
        if *steps.last().unwrap() != self.n_zeta {
            steps.push(self.n_zeta);
        }
        steps
    }

    pub fn zeta_at_step(&self, step: usize) -> f64 {
        if step == self.n_zeta {
            self.zeta_max
        } else {
            step as f64 * self.dzeta()
        }
    }

    pub fn snapshot_depths(&self) -> Vec<f64> {
        self.snapshot_steps()
            .into_iter()
            .map(|s| self.zeta_at_step(s))
            .collect()
    }
}
