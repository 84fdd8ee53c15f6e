//! Subcommands of the `adiabaton` binary.

use std::path::{Path, PathBuf};

use adiabaton::diagnostics::{cross_validate, max_cross_validation, CrossValidation};
use adiabaton::numeric::rel_l2;
use adiabaton::shaping::{builtin_scenarios, design_coupling, Problem};
use adiabaton::{
    photon_invariant, pulse_metrics, EnvelopeSpec, FieldState, PulseMetrics, SimulationResult,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_config, RunConfig, SolverSelector};
use crate::error::{CliError, Result};
use crate::persist::{
    self, fmt17, load_result, persist_result, write_atomic, MetricsDocument, PersistOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "adiabaton",
    version,
    about = "Probe and coupling pulse propagation in a Λ medium"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver(s) chosen by the config's `solver` key.
    Simulate(RunArgs),
    /// Run the adiabatic (characteristics) solver only.
    Adiabatic(RunArgs),
    /// Run both solvers and write their cross-validation.
    Compare(RunArgs),
    /// Design entry envelopes for the config's `[design]` target and verify them.
    Design(RunArgs),
    /// List the built-in scenarios.
    Scenarios {
        /// Print the full scenario definitions as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Recompute the metrics of a persisted result.
    Metrics {
        dir: PathBuf,
        /// Also rewrite `metrics.json` in the result directory.
        #[arg(long)]
        write: bool,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides `output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `emit_plots` to true.
    #[arg(long)]
    plots: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut config = parse_config(&persist::read_text(&self.config)?)?;
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        config.emit_plots |= self.plots;
        Ok(config)
    }
}

/// Parse `argv` (program name first), run, and return the exit status.
pub fn run_command(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return status;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_status()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => {
            let config = args.load()?;
            match config.solver {
                SolverSelector::Direct => run_direct(&config, &config.output_dir).map(drop),
                SolverSelector::Adiabatic => run_adiabatic(&config, &config.output_dir).map(drop),
                SolverSelector::Both => compare(&config),
            }
        }
        Command::Adiabatic(args) => {
            let config = args.load()?;
            run_adiabatic(&config, &config.output_dir).map(drop)
        }
        Command::Compare(args) => compare(&args.load()?),
        Command::Design(args) => design(&args.load()?),
        Command::Scenarios { json } => {
            let scenarios = builtin_scenarios();
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&scenarios).expect("scenarios serialize")
                );
            } else {
                for s in &scenarios {
                    println!(
                        "{:<26} {:<17} {}",
                        s.name,
                        format!("{:?}", s.outcome),
                        s.description
                    );
                }
            }
            Ok(())
        }
        Command::Metrics { dir, write } => {
            let (_, result) = load_result(&dir)?;
            let text = MetricsDocument::compute(&result)?.to_json();
            if write {
                write_atomic(&dir.join(persist::METRICS_FILE), text.as_bytes())?;
            }
            print!("{text}");
            Ok(())
        }
    }
}

fn options(config: &RunConfig) -> PersistOptions<'_> {
    PersistOptions {
        config: Some(config),
        emit_plots: config.emit_plots,
    }
}

fn report(kind: &str, manifest: &Path, result: &SimulationResult) {
    println!(
        "{kind}: {} snapshots to zeta = {} -> {}",
        result.snapshots.len(),
        result.output().zeta,
        manifest.display()
    );
}

/// Direct run; an aborted run still leaves its partial snapshots on disk.
fn run_direct(config: &RunConfig, dir: &Path) -> Result<SimulationResult> {
    match config.problem().run_direct() {
        Ok(result) => {
            let manifest = persist_result(&result, dir, options(config))?;
            report("direct", &manifest, &result);
            Ok(result)
        }
        Err(adiabaton::Error::Aborted {
            zeta,
            source,
            partial,
        }) => {
            if !partial.snapshots.is_empty() {
                persist_result(&partial, dir, options(config))?;
            }
            Err(adiabaton::Error::Aborted {
                zeta,
                source,
                partial,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Adiabatic run; a shock stops it at the last single-valued snapshot, which
/// is persisted before the error is returned.
fn run_adiabatic(config: &RunConfig, dir: &Path) -> Result<SimulationResult> {
    let problem = config.problem();
    let result = problem.run_adiabatic()?;
    let manifest = persist_result(&result, dir, options(config))?;
    report("adiabatic", &manifest, &result);
    if !result.valid {
        return Err(shock_error(&problem, &result));
    }
    Ok(result)
}

fn shock_error(problem: &Problem, result: &SimulationResult) -> CliError {
    let shock = problem
        .characteristics()
        .ok()
        .and_then(|chi| chi.detect_crossing(problem.zeta_grid.zeta_max));
    CliError::Shock {
        zeta: shock.map_or(f64::NAN, |s| s.zeta),
        tau0: shock.map_or(f64::NAN, |s| s.tau0),
        reached: result.output().zeta,
    }
}

#[derive(Serialize)]
struct CrossValidationDocument {
    max_rel_l2: f64,
    adiabatic_valid: bool,
    rows: Vec<CrossValidation>,
}

fn compare(config: &RunConfig) -> Result<()> {
    let root = &config.output_dir;
    let direct = run_direct(config, &root.join("direct"))?;
    let adiabatic = run_adiabatic(config, &root.join("adiabatic"));
    let chi = config.problem().characteristics()?;
    let rows = cross_validate(&direct, &chi)?;
    let doc = CrossValidationDocument {
        max_rel_l2: max_cross_validation(&rows),
        adiabatic_valid: adiabatic.is_ok(),
        rows,
    };
    let text = serde_json::to_string_pretty(&doc).expect("cross-validation serializes") + "\n";
    write_atomic(&root.join("cross_validation.json"), text.as_bytes())?;
    println!("cross-validation: max relative L2 = {:.3e}", doc.max_rel_l2);
    adiabatic.map(drop)
}

fn rel_l2_probe(fields: &FieldState, target: &[f64]) -> f64 {
    rel_l2(&fields.probe_abs(), target)
}

#[derive(Serialize)]
struct DesignDocument {
    depth: f64,
    feasibility_margin: f64,
    target: Option<PulseMetrics>,
    predicted_rel_l2: f64,
    verified_rel_l2: Option<f64>,
    verified: Option<PulseMetrics>,
    shock_zeta: Option<f64>,
}

fn design(config: &RunConfig) -> Result<()> {
    let spec = config.design.as_ref().ok_or_else(|| {
        CliError::validation("design", "the design subcommand needs a [design] table")
    })?;
    let problem = config.problem();
    let grid = problem.tau_grid;
    let depth = spec.depth.unwrap_or(problem.zeta_grid.zeta_max);
    let flux = match &spec.flux {
        Some(f) => f.clone(),
        None => EnvelopeSpec::Tabulated {
            tau: grid.taus(),
            values: photon_invariant(&problem.input_fields()?, &problem.medium),
        },
    };
    let designed = design_coupling(&spec.target, &flux, &problem.medium, depth, &grid)?;
    let target = adiabaton::sample_envelope(&spec.target, &grid)?;
    let root = &config.output_dir;

    let mut table = String::from("# tau\ttheta_in\tgp_in\tgc_in\n");
    for i in 0..grid.n_tau {
        let row = [
            grid.tau(i),
            designed.theta_in[i],
            designed.probe_in[i],
            designed.coupling_in[i],
        ];
        table.push_str(&row.map(fmt17).join("\t"));
        table.push('\n');
    }
    write_atomic(&root.join("design_inputs.tsv"), table.as_bytes())?;

    let mut doc = DesignDocument {
        depth,
        feasibility_margin: designed.feasibility_margin,
        target: pulse_metrics(&target, &grid).ok(),
        predicted_rel_l2: rel_l2_probe(&designed.predicted, &target),
        verified_rel_l2: None,
        verified: None,
        shock_zeta: designed.shock.map(|s| s.zeta),
    };
    let write_doc = |doc: &DesignDocument| -> Result<()> {
        let text = serde_json::to_string_pretty(doc).expect("design serializes") + "\n";
        write_atomic(&root.join("design.json"), text.as_bytes())
    };
    if let Some(s) = designed.shock {
        write_doc(&doc)?;
        return Err(CliError::Shock {
            zeta: s.zeta,
            tau0: s.tau0,
            reached: 0.0,
        });
    }

    // forward check with the direct solver
    let mut forward = problem.clone();
    forward.probe = designed.probe_spec;
    forward.coupling = designed.coupling_spec;
    forward.zeta_grid.zeta_max = depth;
    let mut run_config = config.clone();
    run_config.scenario = None;
    run_config.explicit = Some(forward);
    let verified = run_direct(&run_config, &root.join("verification"));
    if let Ok(result) = &verified {
        doc.verified_rel_l2 = Some(rel_l2_probe(&result.output().fields, &target));
        doc.verified = pulse_metrics(&result.output().fields.probe_abs(), &grid).ok();
    }
    write_doc(&doc)?;
    println!(
        "design: margin {:.3}, predicted L2 {:.3e}, verified L2 {}",
        doc.feasibility_margin,
        doc.predicted_rel_l2,
        doc.verified_rel_l2
            .map_or("n/a".into(), |v| format!("{v:.3e}"))
    );
    verified.map(drop)
}
