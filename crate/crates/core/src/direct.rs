//! Direct integration of the coupled amplitude/field equations.
//!
//! At each depth the amplitudes obey `da/dτ = i M(τ) a` with
//!
//! ```text
//!     | 0     0     g_p* |
//! M = | 0     0     g_c* |
//!     | g_p   g_c   0    |
//! ```
//!
//! integrated by classic RK4 with the envelopes cubically interpolated
//! between grid points. The fields are then advanced in depth by
//! `∂g_p/∂ζ = i κ_p a1* a3`, `∂g_c/∂ζ = i κ_c a2* a3` with a Heun
//! predictor-corrector step, so each depth step costs two amplitude solves.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::adiabatic::adiabaticity_ratio;
use crate::error::{Error, Result};
use crate::grid::{TauGrid, ZetaGrid};
use crate::lambda::{photon_invariant, AtomState, FieldState, MediumSpec};

/// Envelopes must fall below this fraction of their peak at both window edges.
pub const QUIESCENT_EDGE: f64 = 1e-6;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Lower level holding the whole population before the pulses arrive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerLevel {
    #[default]
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// RK4 sub-steps per grid interval of the amplitude equation.
    pub atom_substeps: usize,
    /// Largest tolerated `| |a|² − 1 |` at any grid point.
    pub unitarity_tol: f64,
    /// Abort when any envelope magnitude exceeds this.
    pub max_field: f64,
    pub initial_level: LowerLevel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            atom_substeps: 4,
            unitarity_tol: 1e-6,
            max_field: 1e6,
            initial_level: LowerLevel::One,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atom_substeps == 0 {
            return Err(Error::InvalidGrid(
                "atom_substeps must be at least 1".into(),
            ));
        }
        if !(self.unitarity_tol > 0.0 && self.unitarity_tol.is_finite()) {
            return Err(Error::InvalidGrid("unitarity_tol must be positive".into()));
        }
        if self.max_field.is_nan() || self.max_field <= 0.0 {
            return Err(Error::InvalidGrid("max_field must be positive".into()));
        }
        Ok(())
    }
}

#[inline(always)]
fn generator(gp: C64, gc: C64, a: &[C64; 3]) -> [C64; 3] {
    [
        I * gp.conj() * a[2],
        I * gc.conj() * a[2],
        I * (gp * a[0] + gc * a[1]),
    ]
}

#[inline(always)]
fn axpy(a: &[C64; 3], h: f64, k: &[C64; 3]) -> [C64; 3] {
    [a[0] + k[0] * h, a[1] + k[1] * h, a[2] + k[2] * h]
}

/// Envelope at fraction `u` of interval `k`: cubic through the four
/// surrounding samples, linear in the two outermost intervals.
#[inline]
fn interval_value(g: &[C64], k: usize, u: f64) -> C64 {
    if u == 0.0 {
        return g[k];
    }
    if k == 0 || k + 2 >= g.len() {
        return g[k] + (g[k + 1] - g[k]) * u;
    }
    let wm = -u * (u - 1.0) * (u - 2.0) / 6.0;
    let w0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    let w1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    let w2 = (u + 1.0) * u * (u - 1.0) / 6.0;
    g[k - 1] * wm + g[k] * w0 + g[k + 1] * w1 + g[k + 2] * w2
}

/// Time-ordered amplitude evolution across the window, starting from the
/// configured lower level at `tau_min`.
pub fn evolve_atoms(
    fields: &FieldState,
    grid: &TauGrid,
    config: &SolverConfig,
) -> Result<AtomState> {
    let n = grid.n_tau;
    fields.check_len(n)?;
    let m = config.atom_substeps.max(1);
    let h = grid.dt() / m as f64;
    let inv_m = 1.0 / m as f64;

    let mut a = match config.initial_level {
        LowerLevel::One => [ONE, ZERO, ZERO],
        LowerLevel::Two => [ZERO, ONE, ZERO],
    };
    let mut out = AtomState {
        a1: Vec::with_capacity(n),
        a2: Vec::with_capacity(n),
        a3: Vec::with_capacity(n),
    };
    let push = |out: &mut AtomState, a: &[C64; 3], i: usize| -> Result<()> {
        let norm = a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr();
        if !norm.is_finite() {
            return Err(Error::NonFinite("atomic amplitudes"));
        }
        let deviation = (norm - 1.0).abs();
        if deviation > config.unitarity_tol {
            return Err(Error::NonUnitary {
                tau: grid.tau(i),
                deviation,
                tol: config.unitarity_tol,
            });
        }
        out.a1.push(a[0]);
        out.a2.push(a[1]);
        out.a3.push(a[2]);
        Ok(())
    };
    push(&mut out, &a, 0)?;

    // envelope values at the half-substep nodes of one interval
    let mut gp = vec![ZERO; 2 * m + 1];
    let mut gc = vec![ZERO; 2 * m + 1];
    for k in 0..n - 1 {
        for j in 0..=2 * m {
            let u = j as f64 * 0.5 * inv_m;
            gp[j] = interval_value(&fields.g_p, k, u);
            gc[j] = interval_value(&fields.g_c, k, u);
        }
        for s in 0..m {
            let (j0, jm, j1) = (2 * s, 2 * s + 1, 2 * s + 2);
            let k1 = generator(gp[j0], gc[j0], &a);
            let k2 = generator(gp[jm], gc[jm], &axpy(&a, 0.5 * h, &k1));
            let k3 = generator(gp[jm], gc[jm], &axpy(&a, 0.5 * h, &k2));
            let k4 = generator(gp[j1], gc[j1], &axpy(&a, h, &k3));
            for j in 0..3 {
                a[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
        }
        push(&mut out, &a, k + 1)?;
    }
    Ok(out)
}

/// Depth derivatives `(i κ_p a1* a3, i κ_c a2* a3)`.
pub fn field_rhs(atoms: &AtomState, medium: &MediumSpec) -> (Vec<C64>, Vec<C64>) {
    let probe = atoms
        .a1
        .iter()
        .zip(&atoms.a3)
        .map(|(a1, a3)| I * medium.kappa_p * a1.conj() * a3)
        .collect();
    let coupling = atoms
        .a2
        .iter()
        .zip(&atoms.a3)
        .map(|(a2, a3)| I * medium.kappa_c * a2.conj() * a3)
        .collect();
    (probe, coupling)
}

fn check_fields(fields: &FieldState, config: &SolverConfig) -> Result<()> {
    let mut largest = 0.0_f64;
    for z in fields.g_p.iter().chain(&fields.g_c) {
        let m = z.norm();
        if !m.is_finite() {
            return Err(Error::NonFinite("field envelopes"));
        }
        largest = largest.max(m);
    }
    if largest > config.max_field {
        return Err(Error::Blowup {
            zeta: fields.zeta,
            magnitude: largest,
            limit: config.max_field,
        });
    }
    Ok(())
}

fn heun(
    fields: &FieldState,
    atoms: &AtomState,
    dzeta: f64,
    grid: &TauGrid,
    medium: &MediumSpec,
    config: &SolverConfig,
) -> Result<FieldState> {
    let (dp0, dc0) = field_rhs(atoms, medium);
    let predicted = FieldState {
        zeta: fields.zeta + dzeta,
        g_p: fields
            .g_p
            .iter()
            .zip(&dp0)
            .map(|(g, d)| g + d * dzeta)
            .collect(),
        g_c: fields
            .g_c
            .iter()
            .zip(&dc0)
            .map(|(g, d)| g + d * dzeta)
            .collect(),
    };
    check_fields(&predicted, config)?;
    let atoms1 = evolve_atoms(&predicted, grid, config)?;
    let (dp1, dc1) = field_rhs(&atoms1, medium);
    let half = 0.5 * dzeta;
    let corrected = FieldState {
        zeta: fields.zeta + dzeta,
        g_p: (0..fields.len())
            .map(|i| fields.g_p[i] + (dp0[i] + dp1[i]) * half)
            .collect(),
        g_c: (0..fields.len())
            .map(|i| fields.g_c[i] + (dc0[i] + dc1[i]) * half)
            .collect(),
    };
    check_fields(&corrected, config)?;
    Ok(corrected)
}

/// One Heun predictor-corrector step in depth.
pub fn step_zeta(
    fields: &FieldState,
    dzeta: f64,
    grid: &TauGrid,
    medium: &MediumSpec,
    config: &SolverConfig,
) -> Result<FieldState> {
    if !(dzeta > 0.0 && dzeta.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "depth step must be positive, got {dzeta}"
        )));
    }
    let atoms = evolve_atoms(fields, grid, config)?;
    heun(fields, &atoms, dzeta, grid, medium, config)
}

/// Rejects inputs that are not quiescent at both window edges.
pub fn check_window(fields: &FieldState) -> Result<()> {
    for (which, g) in [("probe", &fields.g_p), ("coupling", &fields.g_c)] {
        let peak = g.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if peak == 0.0 {
            continue;
        }
        let edge = g[0].norm().max(g[g.len() - 1].norm()) / peak;
        if edge >= QUIESCENT_EDGE {
            return Err(Error::WindowTooSmall {
                which,
                edge_ratio: edge,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Direct,
    Adiabatic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    /// `max_τ |V(τ, ζ) − V(τ, 0)| / max_τ V(τ, 0)`.
    pub conservation_residual: f64,
    pub adiabaticity_max: f64,
    pub unitarity_residual: f64,
}

impl SnapshotDiagnostics {
    pub fn evaluate(
        fields: &FieldState,
        atoms: &AtomState,
        v0: &[f64],
        grid: &TauGrid,
        medium: &MediumSpec,
    ) -> Self {
        let v = photon_invariant(fields, medium);
        let scale = v0.iter().copied().fold(0.0_f64, f64::max);
        let diff = v
            .iter()
            .zip(v0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        SnapshotDiagnostics {
            conservation_residual: if scale > 0.0 { diff / scale } else { diff },
            adiabaticity_max: adiabaticity_ratio(fields, grid)
                .into_iter()
                .fold(0.0, f64::max),
            unitarity_residual: atoms.unitarity_residual(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub zeta: f64,
    pub fields: FieldState,
    pub atoms: AtomState,
    pub diagnostics: SnapshotDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub solver: SolverKind,
    pub config: SolverConfig,
    pub crate_version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(solver: SolverKind, config: SolverConfig) -> Self {
        RunManifest {
            solver,
            config,
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        }
    }
}

/// Depth-ordered snapshots of one run; the first is the medium entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub tau_grid: TauGrid,
    pub zeta_grid: ZetaGrid,
    pub medium: MediumSpec,
    pub snapshots: Vec<Snapshot>,
    pub manifest: RunManifest,
    /// False when the run stopped early; snapshots then end before `zeta_max`.
    pub valid: bool,
}

impl SimulationResult {
    pub fn input(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn output(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a result always holds its input snapshot")
    }

    pub fn depths(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.zeta).collect()
    }

    pub fn input_invariant(&self) -> Vec<f64> {
        photon_invariant(&self.input().fields, &self.medium)
    }
}

/// March the input envelopes from `ζ = 0` to `zeta_max`, recording a snapshot
/// every `snapshot_stride` steps and at the end. On failure the snapshots
/// gathered so far are returned inside [`Error::Aborted`].
pub fn propagate(
    input: &FieldState,
    grid: &TauGrid,
    medium: &MediumSpec,
    zeta_grid: &ZetaGrid,
    config: &SolverConfig,
) -> Result<SimulationResult> {
    grid.validate()?;
    zeta_grid.validate()?;
    medium.validate()?;
    config.validate()?;
    input.check_len(grid.n_tau)?;
    if !input.is_finite() {
        return Err(Error::NonFinite("input envelopes"));
    }
    check_window(input)?;

    let started = Instant::now();
    let mut result = SimulationResult {
        tau_grid: *grid,
        zeta_grid: *zeta_grid,
        medium: *medium,
        snapshots: Vec::new(),
        manifest: RunManifest::new(SolverKind::Direct, *config),
        valid: true,
    };
    let v0 = photon_invariant(input, medium);
    let snapshot_steps = zeta_grid.snapshot_steps();
    let mut next_snapshot = 0;
    let dz = zeta_grid.dzeta();

    let mut fields = FieldState {
        zeta: 0.0,
        ..input.clone()
    };
    let abort = |result: &mut SimulationResult, zeta: f64, err: Error, started: Instant| {
        result.valid = false;
        result.manifest.wall_time_s = started.elapsed().as_secs_f64();
        Error::Aborted {
            zeta,
            source: Box::new(err),
            partial: Box::new(result.clone()),
        }
    };

    for step in 0..=zeta_grid.n_zeta {
        let atoms = match evolve_atoms(&fields, grid, config) {
            Ok(a) => a,
            Err(e) => return Err(abort(&mut result, fields.zeta, e, started)),
        };
        if snapshot_steps.get(next_snapshot) == Some(&step) {
            let diagnostics = SnapshotDiagnostics::evaluate(&fields, &atoms, &v0, grid, medium);
            result.snapshots.push(Snapshot {
                zeta: fields.zeta,
                fields: fields.clone(),
                atoms: atoms.clone(),
                diagnostics,
            });
            next_snapshot += 1;
        }
        if step == zeta_grid.n_zeta {
            break;
        }
        match heun(&fields, &atoms, dz, grid, medium, config) {
            Ok(mut next) => {
                next.zeta = zeta_grid.zeta_at_step(step + 1);
                fields = next;
            }
            Err(e) => return Err(abort(&mut result, fields.zeta, e, started)),
        }
    }
    result.manifest.wall_time_s = started.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{sample_envelope, EnvelopeSpec};

    fn grid() -> TauGrid {
        TauGrid::new(-40.0, 40.0, 1024).unwrap()
    }

    fn fields(probe: &EnvelopeSpec, coupling: &EnvelopeSpec, g: &TauGrid) -> FieldState {
        FieldState::from_real(
            0.0,
            &sample_envelope(probe, g).unwrap(),
            &sample_envelope(coupling, g).unwrap(),
        )
    }

    #[test]
    fn zero_fields_leave_ground_state() {
        let g = grid();
        let f = FieldState::from_real(0.0, &vec![0.0; g.n_tau], &vec![0.0; g.n_tau]);
        let a = evolve_atoms(&f, &g, &SolverConfig::default()).unwrap();
        assert_eq!(a, AtomState::ground(g.n_tau));
    }

    #[test]
    fn coupling_alone_is_dark_for_ground_state() {
        let g = grid();
        let zero = EnvelopeSpec::gaussian(0.0, 0.0, 1.0);
        let f = fields(&zero, &EnvelopeSpec::gaussian(20.0, 0.0, 10.0), &g);
        let a = evolve_atoms(&f, &g, &SolverConfig::default()).unwrap();
        assert_eq!(a, AtomState::ground(g.n_tau));
    }

    #[test]
    fn resonant_probe_alone_drives_rabi_oscillation() {
        // constant-area check: with g_c = 0 the |1>-|3> pair rotates by the
        // pulse area, a1 = cos(∫g_p), |a3| = |sin(∫g_p)|
        let g = TauGrid::new(-10.0, 10.0, 4001).unwrap();
        let zero = EnvelopeSpec::gaussian(0.0, 0.0, 1.0);
        let f = fields(&EnvelopeSpec::gaussian(0.5, 0.0, 1.0), &zero, &g);
        let a = evolve_atoms(&f, &g, &SolverConfig::default()).unwrap();
        let area = 0.5 * std::f64::consts::PI.sqrt();
        let last = g.n_tau - 1;
        assert!((a.a1[last].re - area.cos()).abs() < 1e-9);
        assert!((a.a3[last].norm() - area.sin().abs()).abs() < 1e-9);
    }

    #[test]
    fn field_rhs_examples() {
        let m = MediumSpec::equal();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let atoms = AtomState {
            a1: vec![C64::new(s, 0.0), ONE],
            a2: vec![ZERO, ZERO],
            a3: vec![C64::new(s, 0.0), ZERO],
        };
        let (p, c) = field_rhs(&atoms, &m);
        assert!((p[0] - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(p[1], ZERO);
        assert_eq!(c, vec![ZERO, ZERO]);
    }

    #[test]
    fn zero_probe_step_is_identity() {
        let g = grid();
        let zero = EnvelopeSpec::gaussian(0.0, 0.0, 1.0);
        let f = fields(&zero, &EnvelopeSpec::gaussian(20.0, 0.0, 10.0), &g);
        let next = step_zeta(
            &f,
            0.7,
            &g,
            &MediumSpec::new(1.3).unwrap(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(next.g_p, f.g_p);
        assert_eq!(next.g_c, f.g_c);
        assert!(step_zeta(&f, 0.0, &g, &MediumSpec::equal(), &SolverConfig::default()).is_err());
    }

    #[test]
    fn coarse_grid_is_rejected_as_non_unitary() {
        let g = TauGrid::new(-40.0, 40.0, 64).unwrap();
        let f = fields(
            &EnvelopeSpec::gaussian(20.0, 0.0, 1.0),
            &EnvelopeSpec::gaussian(20.0, 0.0, 10.0),
            &g,
        );
        let cfg = SolverConfig {
            atom_substeps: 1,
            ..Default::default()
        };
        assert!(matches!(
            evolve_atoms(&f, &g, &cfg),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn window_guard() {
        let g = grid();
        let f = fields(
            &EnvelopeSpec::gaussian(1.0, 0.0, 1.0),
            &EnvelopeSpec::gaussian(20.0, 0.0, 30.0),
            &g,
        );
        let z = ZetaGrid::new(1.0, 1, 1).unwrap();
        let err =
            propagate(&f, &g, &MediumSpec::equal(), &z, &SolverConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::WindowTooSmall {
                which: "coupling",
                ..
            }
        ));
        assert_eq!(err.code(), "WINDOW_TOO_SMALL");
    }

    #[test]
    fn blowup_guard_aborts_with_partial_result() {
        let g = grid();
        let f = fields(
            &EnvelopeSpec::gaussian(2.0, 0.0, 1.0),
            &EnvelopeSpec::gaussian(2.0, 0.0, 10.0),
            &g,
        );
        let z = ZetaGrid::new(4.0, 4, 1).unwrap();
        let cfg = SolverConfig {
            max_field: 2.05,
            ..Default::default()
        };
        match propagate(&f, &g, &MediumSpec::new(4.0).unwrap(), &z, &cfg) {
            Err(Error::Aborted {
                source, partial, ..
            }) => {
                assert!(matches!(*source, Error::Blowup { .. }));
                assert!(!partial.valid);
                assert!(!partial.snapshots.is_empty());
                assert_eq!(partial.snapshots[0].zeta, 0.0);
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }
}
