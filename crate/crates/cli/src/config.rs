//! Run configuration: a TOML document, version 1.
//!
//! ```toml
//! schema_version = 1
//! solver = "direct"          # direct | adiabatic | both
//! output_dir = "out/fig2"
//! emit_plots = true
//! scenario = "fig2_gaussians"
//! ```
//!
//! Instead of `scenario`, an `[explicit]` table spells the problem out:
//!
//! ```toml
//! [explicit]
//! medium = { kappa_c = 1.25 }
//! tau_grid = { tau_min = -40.0, tau_max = 40.0, n_tau = 4096 }
//! zeta_grid = { zeta_max = 100.0, n_zeta = 2000, snapshot_stride = 100 }
//! solver = { atom_substeps = 4 }          # optional
//! probe = { kind = "gaussian", amplitude = 3.0, center = -10.0, width = 1.0 }
//! coupling = { kind = "supergaussian", amplitude = 20.0, center = 0.0, width = 30.0, order = 16 }
//! ```
//!
//! The `design` subcommand additionally reads a `[design]` table with a
//! `target` envelope, an optional `flux` envelope (default: the photon flux
//! of the configured inputs) and an optional `depth` (default: `zeta_max`).
//! Unknown keys anywhere are errors.

use std::path::PathBuf;

use adiabaton::shaping::{scenario, scenario_names, Problem};
use adiabaton::EnvelopeSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverSelector {
    #[default]
    Direct,
    Adiabatic,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub target: EnvelopeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<EnvelopeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub solver: SolverSelector,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// 1-based line and column of byte `offset` in `text`.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, column)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        CliError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::validation(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn check(key: &str, r: adiabaton::Result<()>) -> Result<()> {
    r.map_err(|e| CliError::validation(key, e.to_string()))
}

pub fn validate_problem(p: &Problem, prefix: &str) -> Result<()> {
    positive(&format!("{prefix}.medium.kappa_p"), p.medium.kappa_p)?;
    positive(&format!("{prefix}.medium.kappa_c"), p.medium.kappa_c)?;
    check(&format!("{prefix}.medium"), p.medium.validate())?;
    check(&format!("{prefix}.tau_grid"), p.tau_grid.validate())?;
    check(&format!("{prefix}.zeta_grid"), p.zeta_grid.validate())?;
    check(&format!("{prefix}.solver"), p.solver.validate())?;
    check(&format!("{prefix}.probe"), p.probe.validate())?;
    check(&format!("{prefix}.coupling"), p.coupling.validate())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(
                "schema_version",
                format!(
                    "unsupported version {}, this build reads {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        match (&self.scenario, &self.explicit) {
            (Some(_), Some(_)) => {
                return Err(CliError::validation(
                    "scenario",
                    "give either `scenario` or `[explicit]`, not both",
                ))
            }
            (None, None) => {
                return Err(CliError::validation(
                    "scenario",
                    "give either `scenario` or `[explicit]`",
                ))
            }
            (Some(name), None) if scenario(name).is_none() => {
                return Err(CliError::validation(
                    "scenario",
                    format!(
                        "unknown scenario {name:?}; built-ins are {}",
                        scenario_names().join(", ")
                    ),
                ))
            }
            (None, Some(p)) => validate_problem(p, "explicit")?,
            _ => {}
        }
        if let Some(d) = &self.design {
            check("design.target", d.target.validate())?;
            if let Some(f) = &d.flux {
                check("design.flux", f.validate())?;
            }
            if let Some(depth) = d.depth {
                positive("design.depth", depth)?;
            }
        }
        Ok(())
    }

    /// The problem this configuration runs.
    pub fn problem(&self) -> Problem {
        match (&self.scenario, &self.explicit) {
            (Some(name), _) => scenario(name).expect("validated scenario name").problem,
            (None, Some(p)) => p.clone(),
            (None, None) => unreachable!("validated config names a problem"),
        }
    }

    /// Normal form: parsing this text gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are representable in TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_column_is_one_based() {
        let t = "a = 1\nbb = 2\n";
        assert_eq!(line_column(t, 0), (1, 1));
        assert_eq!(line_column(t, 6), (2, 1));
        assert_eq!(line_column(t, 9), (2, 4));
    }

    #[test]
    fn minimal_scenario_config() {
        let c = parse_config("schema_version = 1\nscenario = \"fig2_gaussians\"\n").unwrap();
        assert_eq!(c.solver, SolverSelector::Direct);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert!(!c.emit_plots);
        let p = c.problem();
        assert_eq!(p.probe, EnvelopeSpec::gaussian(20.0, 0.0, 1.0));
        assert_eq!(p.coupling, EnvelopeSpec::gaussian(20.0, 0.0, 10.0));
        assert_eq!(p.medium.kappa_c, 1.0);
    }
}
