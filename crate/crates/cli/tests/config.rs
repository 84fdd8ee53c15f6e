//! Configuration parsing, validation and normal form.

use adiabaton::shaping::Problem;
use adiabaton::{EnvelopeSpec, MediumSpec, SolverConfig, TauGrid, ZetaGrid};
use adiabaton_cli::config::{DesignSpec, SolverSelector};
use adiabaton_cli::{parse_config, CliError, RunConfig};
use proptest::prelude::*;

const EXPLICIT: &str = r#"
schema_version = 1
solver = "both"
output_dir = "runs/a"

[explicit]
medium = { kappa_c = 1.25 }
tau_grid = { tau_min = -20.0, tau_max = 20.0, n_tau = 1024 }
zeta_grid = { zeta_max = 10.0, n_zeta = 100, snapshot_stride = 50 }
probe = { kind = "gaussian", amplitude = 3.0, center = -5.0, width = 1.0 }
coupling = { kind = "gaussian", amplitude = 10.0, center = 0.0, width = 6.0 }
"#;

fn key_of(e: CliError) -> String {
    match e {
        CliError::Validation { key, .. } => key,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn explicit_problem_parses() {
    let c = parse_config(EXPLICIT).unwrap();
    assert_eq!(c.solver, SolverSelector::Both);
    let p = c.problem();
    assert_eq!(p.medium.kappa_c, 1.25);
    assert_eq!(p.medium.kappa_p, 1.0);
    assert_eq!(p.tau_grid.n_tau, 1024);
    assert_eq!(p.solver, SolverConfig::default());
}

#[test]
fn negative_constant_names_its_key() {
    let text = EXPLICIT.replace("kappa_c = 1.25", "kappa_c = -1.0");
    let e = parse_config(&text).unwrap_err();
    assert_eq!(e.code(), "VALIDATION_ERROR");
    assert_eq!(e.exit_status(), 2);
    assert_eq!(key_of(e), "explicit.medium.kappa_c");
}

#[test]
fn scenario_and_explicit_are_exclusive() {
    let text = EXPLICIT.replace("solver = \"both\"", "scenario = \"fig2_gaussians\"");
    assert_eq!(key_of(parse_config(&text).unwrap_err()), "scenario");
    assert_eq!(
        key_of(parse_config("schema_version = 1\n").unwrap_err()),
        "scenario"
    );
}

#[test]
fn other_schema_versions_are_refused() {
    let e = parse_config("schema_version = 2\nscenario = \"fig2_gaussians\"\n").unwrap_err();
    assert_eq!(key_of(e), "schema_version");
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let e = parse_config("schema_version = 1\nscenario = fig2\n").unwrap_err();
    match e {
        CliError::Parse { line, column, .. } => assert_eq!((line, column), (2, 12)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let e =
        parse_config("schema_version = 1\nscenario = \"fig2_gaussians\"\nkappa = 2\n").unwrap_err();
    match e {
        CliError::Parse { line, message, .. } => {
            assert_eq!(line, 3);
            assert!(message.contains("kappa"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let nested = EXPLICIT.replace("kappa_c = 1.25", "kappa_c = 1.25, kappa_x = 1.0");
    assert_eq!(parse_config(&nested).unwrap_err().code(), "PARSE_ERROR");
}

#[test]
fn grid_errors_name_the_table() {
    let text = EXPLICIT.replace("n_tau = 1024", "n_tau = 1");
    assert_eq!(
        key_of(parse_config(&text).unwrap_err()),
        "explicit.tau_grid"
    );
    let text = EXPLICIT.replace("snapshot_stride = 50", "snapshot_stride = 0");
    assert_eq!(
        key_of(parse_config(&text).unwrap_err()),
        "explicit.zeta_grid"
    );
}

#[test]
fn design_depth_must_be_positive() {
    let text = format!(
        "{}\n[design]\ntarget = {{ kind = \"gaussian\", amplitude = 3.0, center = 0.0, width = 1.0 }}\ndepth = -5.0\n",
        EXPLICIT
    );
    assert_eq!(key_of(parse_config(&text).unwrap_err()), "design.depth");
}

fn envelope() -> impl Strategy<Value = EnvelopeSpec> {
    prop_oneof![
        (0.0f64..30.0, -10.0f64..10.0, 0.1f64..10.0)
            .prop_map(|(a, c, w)| EnvelopeSpec::gaussian(a, c, w)),
        (0.0f64..30.0, -10.0f64..10.0, 0.1f64..30.0, 1u32..8)
            .prop_map(|(a, c, w, k)| EnvelopeSpec::supergaussian(a, c, w, 2 * k)),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        envelope(),
        envelope(),
        0.05f64..20.0,
        (-50.0f64..-1.0, 1.0f64..50.0, 16usize..5000),
        (0.1f64..1e4, 1usize..5000),
        prop::option::of(envelope()),
        any::<bool>(),
        0u8..3,
    )
        .prop_map(
            |(probe, coupling, kappa_c, (t0, t1, n), (z, nz), target, plots, solver)| RunConfig {
                schema_version: 1,
                solver: [
                    SolverSelector::Direct,
                    SolverSelector::Adiabatic,
                    SolverSelector::Both,
                ][solver as usize],
                output_dir: "out/x".into(),
                emit_plots: plots,
                scenario: None,
                explicit: Some(Problem {
                    probe,
                    coupling,
                    medium: MediumSpec::new(kappa_c).unwrap(),
                    tau_grid: TauGrid {
                        tau_min: t0,
                        tau_max: t1,
                        n_tau: n,
                    },
                    zeta_grid: ZetaGrid {
                        zeta_max: z,
                        n_zeta: nz,
                        snapshot_stride: 1 + nz / 3,
                    },
                    solver: SolverConfig::default(),
                }),
                design: target.map(|target| DesignSpec {
                    target,
                    flux: None,
                    depth: Some(z),
                }),
            },
        )
}

proptest! {
    #[test]
    fn normal_form_is_a_fixed_point(c in config()) {
        let text = c.to_toml();
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_toml(), text);
    }
}
