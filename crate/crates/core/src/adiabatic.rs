//! Dark-state following solution by the method of characteristics.
//!
//! In the adiabatic limit the mixing angle is transported unchanged along
//! curves on which
//!
//! ```text
//! W(τ) = W(τ₀) + K(θ₀(τ₀))² ζ / (κ_p κ_c),      W(τ) = ∫ V dτ'
//! ```
//!
//! and `V` does not depend on depth, so everything is fixed by the entry
//! profiles. Fields and amplitudes are rebuilt from `θ` and `V`.

use std::time::Instant;

use num_complex::Complex64 as C64;

use crate::direct::{
    RunManifest, SimulationResult, Snapshot, SnapshotDiagnostics, SolverConfig, SolverKind,
};
use crate::error::{Error, Result};
use crate::grid::{TauGrid, ZetaGrid};
use crate::lambda::{mixing_angle, photon_invariant, AtomState, FieldState, MediumSpec};
use crate::numeric::{
    bisect, centered_diff, centered_diff_complex, cumulative_trapezoid, interp_uniform,
};

/// Below this total Rabi magnitude the adiabaticity ratio is reported as 0.
pub const QUIESCENT_FIELD: f64 = 1e-9;
/// The ratio is also reported as 0 below this fraction of the peak `|g|`;
/// in the far tails it only measures rounding noise.
pub const QUIESCENT_FRACTION: f64 = 1e-3;

/// Relative depth accuracy of [`CharacteristicField::detect_crossing`].
pub const SHOCK_REL_TOL: f64 = 0.01;

/// Entry mixing angle at the leading window edge below which the medium
/// ahead of the window counts as probe-free.
pub const QUIESCENT_THETA: f64 = 1e-12;

/// Entry mixing angle and cumulative photon integral on the time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicField {
    grid: TauGrid,
    medium: MediumSpec,
    theta0: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

/// First crossing of two characteristics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shock {
    pub zeta: f64,
    /// Entry time of the overtaken characteristic.
    pub tau0: f64,
    /// Where the crossing happens, if inside the window.
    pub tau: Option<f64>,
}

/// Forward map `T(τ₀) = W(τ₀) + K(θ₀)² ζ/(κ_p κ_c)` at one depth.
struct Transport<'a> {
    chi: &'a CharacteristicField,
    zeta: f64,
    targets: Vec<f64>,
    monotone: bool,
}

impl<'a> Transport<'a> {
    fn new(chi: &'a CharacteristicField, zeta: f64) -> Self {
        let targets: Vec<f64> = (0..chi.theta0.len())
            .map(|j| chi.w[j] + chi.lift(chi.theta0[j], zeta))
            .collect();
        // ties occur where the flux vanishes and are not crossings
        let monotone = targets.windows(2).all(|p| p[1] >= p[0]);
        Transport {
            chi,
            zeta,
            targets,
            monotone,
        }
    }

    fn residual(&self, w_tau: f64, tau0: f64) -> f64 {
        let x = self.chi.grid.index_of(tau0);
        w_tau
            - interp_uniform(&self.chi.w, x)
            - self
                .chi
                .lift(interp_uniform(&self.chi.theta0, x), self.zeta)
    }

    /// Entry time of the characteristic through `tau`.
    fn trace(&self, tau: f64) -> Result<f64> {
        if self.zeta == 0.0 {
            return Ok(tau);
        }
        let grid = &self.chi.grid;
        let x = grid.index_of(tau).clamp(0.0, (grid.n_tau - 1) as f64);
        let w_tau = interp_uniform(&self.chi.w, x);
        let tau = grid.tau_min + x * grid.dt();
        let last = x.floor() as usize;

        if w_tau < self.targets[0] {
            return Err(Error::NoRoot {
                tau,
                zeta: self.zeta,
            });
        }

        let j = if self.monotone {
            // last node with T_j <= W(τ)
            self.targets[..=last].partition_point(|&t| t <= w_tau) - 1
        } else {
            let mut root = None;
            let mut count = 0;
            for j in 0..=last {
                let f0 = w_tau - self.targets[j];
                let f1 = if j == last {
                    self.residual(w_tau, tau)
                } else {
                    w_tau - self.targets[j + 1]
                };
                if f0 >= 0.0 && f1 < 0.0 {
                    count += 1;
                    root = Some(j);
                } else if f0 < 0.0 && f1 >= 0.0 {
                    count += 1;
                }
            }
            if count > 1 {
                return Err(Error::Multivalued {
                    tau,
                    zeta: self.zeta,
                });
            }
            root.ok_or(Error::NoRoot {
                tau,
                zeta: self.zeta,
            })?
        };

        let lo = grid.tau(j);
        let hi = if j >= last { tau } else { grid.tau(j + 1) };
        if hi <= lo {
            return Ok(lo);
        }
        let tol = 1e-13 * (1.0 + lo.abs().max(hi.abs()));
        Ok(bisect(|t| self.residual(w_tau, t), lo, hi, tol, 200).unwrap_or(lo))
    }
}

impl CharacteristicField {
    /// Characteristics of real, non-negative entry envelopes.
    pub fn build(input: &FieldState, grid: &TauGrid, medium: &MediumSpec) -> Result<Self> {
        grid.validate()?;
        medium.validate()?;
        input.check_len(grid.n_tau)?;
        if !input.is_finite() {
            return Err(Error::NonFinite("input envelopes"));
        }
        Self::from_parts(
            mixing_angle(input),
            photon_invariant(input, medium),
            grid,
            medium,
        )
    }

    /// Characteristics from an entry mixing angle and photon flux profile.
    pub fn from_parts(
        theta0: Vec<f64>,
        v: Vec<f64>,
        grid: &TauGrid,
        medium: &MediumSpec,
    ) -> Result<Self> {
        for len in [theta0.len(), v.len()] {
            if len != grid.n_tau {
                return Err(Error::LengthMismatch {
                    expected: grid.n_tau,
                    actual: len,
                });
            }
        }
        if v.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidEnvelope(
                "photon flux must be finite and non-negative".into(),
            ));
        }
        let w = cumulative_trapezoid(&v, grid.dt());
        Ok(CharacteristicField {
            grid: *grid,
            medium: *medium,
            theta0,
            v,
            w,
        })
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn medium(&self) -> &MediumSpec {
        &self.medium
    }

    pub fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    pub fn invariant(&self) -> &[f64] {
        &self.v
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.w
    }

    /// `K(θ)² ζ / (κ_p κ_c)`: how far along `W` a characteristic moves.
    #[inline]
    fn lift(&self, theta: f64, zeta: f64) -> f64 {
        let k = self.medium.effective_k(theta);
        k * k * zeta / (self.medium.kappa_p * self.medium.kappa_c)
    }

    /// Smallest `τ` with `W(τ) = target`, linear between samples.
    fn invert_w(&self, target: f64) -> Result<f64> {
        let n = self.w.len();
        let available = self.w[n - 1];
        if target > available {
            return Err(Error::WindowExceeded {
                required: target,
                available,
            });
        }
        let j = self.w.partition_point(|&x| x < target);
        if j == 0 {
            return Ok(self.grid.tau_min);
        }
        let (w0, w1) = (self.w[j - 1], self.w[j]);
        let f = if w1 > w0 {
            (target - w0) / (w1 - w0)
        } else {
            1.0
        };
        Ok(self.grid.tau(j - 1) + f * self.grid.dt())
    }

    /// Where the characteristic entering at `tau0` sits at depth `zeta`.
    pub fn characteristic_tau(&self, tau0: f64, zeta: f64) -> Result<f64> {
        if zeta.is_nan() || zeta < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "depth must be non-negative, got {zeta}"
            )));
        }
        if zeta == 0.0 {
            return Ok(tau0);
        }
        let x = self.grid.index_of(tau0);
        let target = interp_uniform(&self.w, x) + self.lift(interp_uniform(&self.theta0, x), zeta);
        self.invert_w(target)
    }

    /// Entry time `τ₀` of the characteristic that reaches `tau` at `zeta`.
    pub fn trace_back(&self, tau: f64, zeta: f64) -> Result<f64> {
        if zeta.is_nan() || zeta < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "depth must be non-negative, got {zeta}"
            )));
        }
        Transport::new(self, zeta).trace(tau)
    }

    /// Smallest depth up to `zeta_max` at which two characteristics cross.
    pub fn detect_crossing(&self, zeta_max: f64) -> Option<Shock> {
        if zeta_max.is_nan() || zeta_max <= 0.0 {
            return None;
        }
        let crossed = |z: f64| !Transport::new(self, z).monotone;
        if !crossed(zeta_max) {
            return None;
        }
        // geometric ladder down from zeta_max to bracket the onset
        let mut hi = zeta_max;
        let mut lo = 0.0;
        for _ in 0..60 {
            let z = 0.5 * hi;
            if crossed(z) {
                hi = z;
            } else {
                lo = z;
                break;
            }
        }
        while hi - lo > SHOCK_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if crossed(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t = Transport::new(self, hi);
        let i = t.targets.windows(2).position(|p| p[1] < p[0]).unwrap_or(0);
        Some(Shock {
            zeta: hi,
            tau0: self.grid.tau(i),
            tau: self.invert_w(t.targets[i]).ok(),
        })
    }

    /// Mixing angle on the grid at depth `zeta`.
    pub fn theta_at(&self, zeta: f64) -> Result<Vec<f64>> {
        let t = Transport::new(self, zeta);
        let quiescent = self.theta0[0];
        (0..self.grid.n_tau)
            .map(|i| match t.trace(self.grid.tau(i)) {
                Ok(tau0) => Ok(interp_uniform(&self.theta0, self.grid.index_of(tau0))),
                // nothing from inside the window has arrived yet
                Err(Error::NoRoot { .. }) if quiescent <= QUIESCENT_THETA => Ok(quiescent),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// Fields and dark-state amplitudes at depth `zeta`.
    pub fn reconstruct(&self, zeta: f64) -> Result<(FieldState, AtomState)> {
        let theta = self.theta_at(zeta)?;
        Ok(self.fields_from_theta(zeta, &theta))
    }

    pub(crate) fn fields_from_theta(&self, zeta: f64, theta: &[f64]) -> (FieldState, AtomState) {
        let m = &self.medium;
        let mut g_p = Vec::with_capacity(theta.len());
        let mut g_c = Vec::with_capacity(theta.len());
        for (&th, &v) in theta.iter().zip(&self.v) {
            let amp = (m.kappa_p * m.kappa_c * v / m.effective_k(th)).sqrt();
            let (s, c) = th.sin_cos();
            g_p.push(C64::new(amp * s, 0.0));
            g_c.push(C64::new(amp * c, 0.0));
        }
        let dtheta = centered_diff(theta, self.grid.dt());
        let mut atoms = AtomState {
            a1: Vec::new(),
            a2: Vec::new(),
            a3: Vec::new(),
        };
        for (i, &th) in theta.iter().enumerate() {
            let mag = (g_p[i].norm_sqr() + g_c[i].norm_sqr()).sqrt();
            let (s, c) = th.sin_cos();
            atoms.a1.push(C64::new(c, 0.0));
            atoms.a2.push(C64::new(-s, 0.0));
            let a3 = if mag < QUIESCENT_FIELD {
                0.0
            } else {
                dtheta[i] / mag
            };
            atoms.a3.push(C64::new(0.0, a3));
        }
        (FieldState { zeta, g_p, g_c }, atoms)
    }

    /// Snapshots at the depths of `zeta_grid`. A crossing stops the run and
    /// the result is flagged invalid.
    pub fn solve(&self, zeta_grid: &ZetaGrid) -> Result<SimulationResult> {
        zeta_grid.validate()?;
        let started = Instant::now();
        let mut result = SimulationResult {
            tau_grid: self.grid,
            zeta_grid: *zeta_grid,
            medium: self.medium,
            snapshots: Vec::new(),
            manifest: RunManifest::new(SolverKind::Adiabatic, SolverConfig::default()),
            valid: true,
        };
        // conservation is measured against the first (entry) snapshot
        let mut v0: Option<Vec<f64>> = None;
        for zeta in zeta_grid.snapshot_depths() {
            match self.reconstruct(zeta) {
                Ok((fields, atoms)) => {
                    let v0 = v0.get_or_insert_with(|| photon_invariant(&fields, &self.medium));
                    let diagnostics = SnapshotDiagnostics::evaluate(
                        &fields,
                        &atoms,
                        v0,
                        &self.grid,
                        &self.medium,
                    );
                    result.snapshots.push(Snapshot {
                        zeta,
                        fields,
                        atoms,
                        diagnostics,
                    });
                }
                Err(Error::Multivalued { .. }) if !result.snapshots.is_empty() => {
                    result.valid = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        result.manifest.wall_time_s = started.elapsed().as_secs_f64();
        Ok(result)
    }
}

/// `r = |g_c ∂g_p − g_p ∂g_c| / |g|³`, zero where `|g|` is negligible
/// (below [`QUIESCENT_FIELD`] or [`QUIESCENT_FRACTION`] of its peak).
pub fn adiabaticity_ratio(fields: &FieldState, grid: &TauGrid) -> Vec<f64> {
    let dp = centered_diff_complex(&fields.g_p, grid.dt());
    let dc = centered_diff_complex(&fields.g_c, grid.dt());
    let mag: Vec<f64> = fields
        .g_p
        .iter()
        .zip(&fields.g_c)
        .map(|(p, c)| (p.norm_sqr() + c.norm_sqr()).sqrt())
        .collect();
    let floor = QUIESCENT_FIELD.max(QUIESCENT_FRACTION * mag.iter().copied().fold(0.0, f64::max));
    (0..fields.len())
        .map(|i| {
            let m = mag[i];
            if m < floor {
                0.0
            } else {
                (fields.g_c[i] * dp[i] - fields.g_p[i] * dc[i]).norm() / (m * m * m)
            }
        })
        .collect()
}
