//! Checks on finished runs: conservation, solver agreement, front
//! steepness, coherence localisation and grid convergence.

use serde::{Deserialize, Serialize};

use crate::adiabatic::CharacteristicField;
use crate::direct::SimulationResult;
use crate::error::{Error, Result};
use crate::grid::TauGrid;
use crate::lambda::{photon_invariant, FieldState};
use crate::metrics::{argmax, pulse_metrics};
use crate::numeric::{centered_diff, rel_l2_complex};
use crate::shaping::Problem;

/// `|ρ21|` above which a cell counts as excited.
pub const COHERENCE_THRESHOLD: f64 = 0.01;
/// Probe level, relative to its peak, that marks the reemission front.
pub const FRONT_LEVEL: f64 = 1e-3;
/// Differences below this are treated as rounding in convergence studies.
pub const ROUNDING_FLOOR: f64 = 1e-13;

/// `max_{ζ,τ} |V(τ,ζ) − V(τ,0)| / max_τ V(τ,0)`.
pub fn conservation_residual(result: &SimulationResult) -> f64 {
    let v0 = result.input_invariant();
    let scale = v0.iter().copied().fold(0.0_f64, f64::max);
    let mut worst = 0.0_f64;
    for s in &result.snapshots {
        let v = photon_invariant(&s.fields, &result.medium);
        for (a, b) in v.iter().zip(&v0) {
            worst = worst.max((a - b).abs());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

pub fn unitarity_residual(result: &SimulationResult) -> f64 {
    result
        .snapshots
        .iter()
        .map(|s| s.atoms.unitarity_residual())
        .fold(0.0, f64::max)
}

pub fn adiabaticity_max(result: &SimulationResult) -> f64 {
    result
        .snapshots
        .iter()
        .map(|s| s.diagnostics.adiabaticity_max)
        .fold(0.0, f64::max)
}

/// Relative L2 distance between a direct snapshot and the adiabatic
/// reconstruction at the same depth; `None` past a characteristic crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub zeta: f64,
    pub probe_l2: Option<f64>,
    pub coupling_l2: Option<f64>,
    pub multivalued: bool,
}

pub fn cross_validate(
    direct: &SimulationResult,
    chi: &CharacteristicField,
) -> Result<Vec<CrossValidation>> {
    if chi.grid() != &direct.tau_grid {
        return Err(Error::InvalidGrid(
            "direct run and characteristics use different time grids".into(),
        ));
    }
    direct
        .snapshots
        .iter()
        .map(|s| match chi.reconstruct(s.zeta) {
            Ok((fields, _)) => Ok(CrossValidation {
                zeta: s.zeta,
                probe_l2: Some(rel_l2_complex(&fields.g_p, &s.fields.g_p)),
                coupling_l2: Some(rel_l2_complex(&fields.g_c, &s.fields.g_c)),
                multivalued: false,
            }),
            Err(Error::Multivalued { .. }) => Ok(CrossValidation {
                zeta: s.zeta,
                probe_l2: None,
                coupling_l2: None,
                multivalued: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Largest pre-crossing cross-validation error over both envelopes.
pub fn max_cross_validation(rows: &[CrossValidation]) -> f64 {
    rows.iter()
        .flat_map(|r| [r.probe_l2, r.coupling_l2])
        .flatten()
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSlopes {
    pub leading_max_slope: f64,
    pub trailing_max_slope: f64,
}

/// Steepest rise before and steepest fall after the probe peak, on `|g_p|`.
pub fn edge_slopes(fields: &FieldState, grid: &TauGrid) -> Result<EdgeSlopes> {
    let y = fields.probe_abs();
    let m = pulse_metrics(&y, grid)?;
    if m.n_local_maxima != 1 {
        return Err(Error::DegeneratePulse(format!(
            "probe has {} local maxima",
            m.n_local_maxima
        )));
    }
    let peak = argmax(&y);
    let d = centered_diff(&y, grid.dt());
    let max_abs = |s: &[f64]| s.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(EdgeSlopes {
        leading_max_slope: max_abs(&d[..=peak]),
        trailing_max_slope: max_abs(&d[peak..]),
    })
}

/// `|a2* a1|` per snapshot (rows) and time sample (columns).
pub fn coherence_map(result: &SimulationResult) -> Vec<Vec<f64>> {
    result
        .snapshots
        .iter()
        .map(|s| s.atoms.coherence())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub max: f64,
    /// Fraction of `(τ, ζ)` cells with `|ρ21|` above [`COHERENCE_THRESHOLD`].
    pub excited_fraction: f64,
    /// Largest `|ρ21|` behind the trailing probe front, over all snapshots.
    pub beyond_front_max: f64,
}

pub fn coherence_summary(result: &SimulationResult) -> CoherenceSummary {
    let map = coherence_map(result);
    let mut max = 0.0_f64;
    let mut excited = 0usize;
    let mut cells = 0usize;
    let mut beyond = 0.0_f64;
    for (row, s) in map.iter().zip(&result.snapshots) {
        let probe = s.fields.probe_abs();
        let peak = probe.iter().copied().fold(0.0, f64::max);
        let front = probe.iter().rposition(|&v| v >= FRONT_LEVEL * peak);
        for (i, &c) in row.iter().enumerate() {
            max = max.max(c);
            cells += 1;
            if c > COHERENCE_THRESHOLD {
                excited += 1;
            }
            if front.is_some_and(|f| i > f) {
                beyond = beyond.max(c);
            }
        }
    }
    CoherenceSummary {
        max,
        excited_fraction: if cells > 0 {
            excited as f64 / cells as f64
        } else {
            0.0
        },
        beyond_front_max: beyond,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_tau: Vec<usize>,
    pub n_zeta: Vec<usize>,
    /// Change of the exit fields between consecutive levels, relative L2 on
    /// the coarser grid.
    pub differences: Vec<f64>,
    /// Observed order per refinement; `None` once both differences are at
    /// rounding level.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().flatten().copied().reduce(f64::min)
    }
}

fn restricted_difference(coarse: &FieldState, fine: &FieldState) -> f64 {
    let pick = |v: &[num_complex::Complex64]| -> Vec<num_complex::Complex64> {
        v.iter().step_by(2).copied().collect()
    };
    let mut a = coarse.g_p.clone();
    a.extend_from_slice(&coarse.g_c);
    let mut b = pick(&fine.g_p);
    b.extend(pick(&fine.g_c));
    rel_l2_complex(&b, &a)
}

/// Run the direct solver at `levels` resolutions, each halving both steps,
/// and estimate the observed order from successive differences of the exit
/// fields.
pub fn convergence_study(problem: &Problem, levels: usize) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::InvalidGrid(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let mut exits = Vec::with_capacity(levels);
    let mut n_tau = Vec::new();
    let mut n_zeta = Vec::new();
    for level in 0..levels {
        let p = problem.refined(level as u32);
        n_tau.push(p.tau_grid.n_tau);
        n_zeta.push(p.zeta_grid.n_zeta);
        exits.push(p.run_direct()?.output().fields.clone());
    }
    let differences: Vec<f64> = exits
        .windows(2)
        .map(|w| restricted_difference(&w[0], &w[1]))
        .collect();
    let mut orders = Vec::new();
    for w in differences.windows(2) {
        let (coarse, fine) = (w[0], w[1]);
        if coarse <= ROUNDING_FLOOR && fine <= ROUNDING_FLOOR {
            orders.push(None);
            continue;
        }
        if fine >= coarse {
            return Err(Error::NonConvergent { coarse, fine });
        }
        orders.push(Some((coarse / fine).log2()));
    }
    Ok(ConvergenceReport {
        n_tau,
        n_zeta,
        differences,
        orders,
    })
}

/// Scalar summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub conservation_residual_max: f64,
    pub unitarity_residual_max: f64,
    pub adiabaticity_max: f64,
    pub cross_validation: Vec<CrossValidation>,
    /// Per snapshot; `None` where the probe is not a single pulse.
    pub edge_slopes: Vec<Option<EdgeSlopes>>,
    pub coherence: CoherenceSummary,
}

impl DiagnosticsReport {
    pub fn new(result: &SimulationResult, chi: Option<&CharacteristicField>) -> Result<Self> {
        let cross_validation = match chi {
            Some(chi) => cross_validate(result, chi)?,
            None => Vec::new(),
        };
        Ok(DiagnosticsReport {
            conservation_residual_max: conservation_residual(result),
            unitarity_residual_max: unitarity_residual(result),
            adiabaticity_max: adiabaticity_max(result),
            cross_validation,
            edge_slopes: result
                .snapshots
                .iter()
                .map(|s| edge_slopes(&s.fields, &result.tau_grid).ok())
                .collect(),
            coherence: coherence_summary(result),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{sample_envelope, EnvelopeSpec};
    use crate::lambda::AtomState;
    use num_complex::Complex64 as C64;

    #[test]
    fn symmetric_gaussian_has_equal_edges() {
        let g = TauGrid::new(-40.0, 40.0, 4095).unwrap();
        let y = sample_envelope(&EnvelopeSpec::gaussian(5.0, 0.0, 1.0), &g).unwrap();
        let f = FieldState::from_real(0.0, &y, &vec![0.0; g.n_tau]);
        let e = edge_slopes(&f, &g).unwrap();
        assert!((e.leading_max_slope - e.trailing_max_slope).abs() < 1e-9);
        // max |d/dτ 5 e^{−τ²}| = 5 sqrt(2) e^{−1/2}
        let exact = 5.0 * 2f64.sqrt() * (-0.5f64).exp();
        assert!((e.leading_max_slope - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn double_pulse_has_no_edges() {
        let g = TauGrid::new(-40.0, 40.0, 1024).unwrap();
        let spec = EnvelopeSpec::Sum {
            parts: vec![
                EnvelopeSpec::gaussian(5.0, -5.0, 1.0),
                EnvelopeSpec::gaussian(5.0, 5.0, 1.0),
            ],
        };
        let y = sample_envelope(&spec, &g).unwrap();
        let f = FieldState::from_real(0.0, &y, &vec![0.0; g.n_tau]);
        assert!(matches!(
            edge_slopes(&f, &g),
            Err(Error::DegeneratePulse(_))
        ));
    }

    #[test]
    fn coherence_is_maximal_at_quarter_angle() {
        let (s, c) = std::f64::consts::FRAC_PI_4.sin_cos();
        let a = AtomState {
            a1: vec![C64::new(c, 0.0)],
            a2: vec![C64::new(-s, 0.0)],
            a3: vec![C64::new(0.0, 0.0)],
        };
        assert!((a.coherence()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn restriction_compares_matching_samples() {
        let coarse = FieldState::from_real(0.0, &[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]);
        let fine = FieldState::from_real(0.0, &[1.0, 9.0, 2.0, 9.0, 3.0], &[0.0; 5]);
        assert_eq!(restricted_difference(&coarse, &fine), 0.0);
    }
}
