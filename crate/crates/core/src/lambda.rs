//! Medium and state types for the three-level Λ system, plus the pointwise
//! quantities shared by both solvers.
//!
//! Units: retarded time in probe durations, Rabi envelopes as `g = G T_p`,
//! depth as `K_p T_p z`. With that scaling the probe propagation constant is
//! exactly one and only `kappa_c = K_c / K_p` remains.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaled propagation constants of the two optical transitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    #[serde(default = "one")]
    pub kappa_p: f64,
    pub kappa_c: f64,
}

fn one() -> f64 {
    1.0
}

impl MediumSpec {
    pub fn new(kappa_c: f64) -> Result<Self> {
        let m = MediumSpec {
            kappa_p: 1.0,
            kappa_c,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn equal() -> Self {
        MediumSpec {
            kappa_p: 1.0,
            kappa_c: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa_p != 1.0 {
            return Err(Error::InvalidMedium(format!(
                "kappa_p is fixed to 1 by the depth scaling, got {}",
                self.kappa_p
            )));
        }
        if !(self.kappa_c.is_finite() && self.kappa_c > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "kappa_c must be positive, got {}",
                self.kappa_c
            )));
        }
        Ok(())
    }

    /// `K(θ) = κ_p cos²θ + κ_c sin²θ`, written as `κ_p + (κ_c − κ_p) sin²θ`
    /// so it is exactly constant when the two constants are equal.
    #[inline]
    pub fn effective_k(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.kappa_p + (self.kappa_c - self.kappa_p) * s * s
    }
}

/// Probe and coupling envelopes at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub zeta: f64,
    pub g_p: Vec<C64>,
    pub g_c: Vec<C64>,
}

impl FieldState {
    pub fn from_real(zeta: f64, g_p: &[f64], g_c: &[f64]) -> Self {
        FieldState {
            zeta,
            g_p: g_p.iter().map(|&v| C64::new(v, 0.0)).collect(),
            g_c: g_c.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.g_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_p.is_empty()
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        for len in [self.g_p.len(), self.g_c.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.g_p
            .iter()
            .chain(&self.g_c)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn probe_abs(&self) -> Vec<f64> {
        self.g_p.iter().map(|z| z.norm()).collect()
    }

    pub fn coupling_abs(&self) -> Vec<f64> {
        self.g_c.iter().map(|z| z.norm()).collect()
    }

    /// Exchange the roles of probe and coupling.
    pub fn swapped(&self) -> Self {
        FieldState {
            zeta: self.zeta,
            g_p: self.g_c.clone(),
            g_c: self.g_p.clone(),
        }
    }
}

/// Probability amplitudes of `|1⟩, |2⟩, |3⟩` on the time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomState {
    pub a1: Vec<C64>,
    pub a2: Vec<C64>,
    pub a3: Vec<C64>,
}

impl AtomState {
    pub fn ground(n: usize) -> Self {
        AtomState {
            a1: vec![C64::new(1.0, 0.0); n],
            a2: vec![C64::new(0.0, 0.0); n],
            a3: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn len(&self) -> usize {
        self.a1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a1.is_empty()
    }

    pub fn norm_sqr(&self, i: usize) -> f64 {
        self.a1[i].norm_sqr() + self.a2[i].norm_sqr() + self.a3[i].norm_sqr()
    }

    /// `max_τ | |a1|² + |a2|² + |a3|² − 1 |`.
    pub fn unitarity_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.norm_sqr(i) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Raman coherence `|ρ21| = |a2* a1|`.
    pub fn coherence(&self) -> Vec<f64> {
        self.a1
            .iter()
            .zip(&self.a2)
            .map(|(a1, a2)| (a2.conj() * a1).norm())
            .collect()
    }
}

/// Mixing angle `θ = atan2(|g_p|, |g_c|) ∈ [0, π/2]`; zero where both
/// envelopes vanish.
pub fn mixing_angle(fields: &FieldState) -> Vec<f64> {
    fields
        .g_p
        .iter()
        .zip(&fields.g_c)
        .map(|(p, c)| mixing_angle_at(p.norm(), c.norm()))
        .collect()
}

#[inline]
pub fn mixing_angle_at(probe_abs: f64, coupling_abs: f64) -> f64 {
    if probe_abs == 0.0 && coupling_abs == 0.0 {
        0.0
    } else {
        probe_abs.atan2(coupling_abs)
    }
}

/// Photon-number flux `V = |g_c|²/κ_c + |g_p|²/κ_p`, conserved along depth in
/// the adiabatic regime.
pub fn photon_invariant(fields: &FieldState, medium: &MediumSpec) -> Vec<f64> {
    fields
        .g_p
        .iter()
        .zip(&fields.g_c)
        .map(|(p, c)| c.norm_sqr() / medium.kappa_c + p.norm_sqr() / medium.kappa_p)
        .collect()
}
