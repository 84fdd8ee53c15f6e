//! On-disk result format.
//!
//! A result directory holds one tab-separated table per snapshot
//! (`snapshot_NNNN.tsv`), `metrics.json`, `manifest.json` and `timing.json`.
//! Snapshot tables start with two `#` lines, `# zeta <value>` and the column
//! header, followed by one row per time sample. Every number is written with
//! 17 significant digits, so reloading reproduces the doubles exactly. The
//! manifest lists every file with its SHA-256; wall time lives in
//! `timing.json` so that the manifest depends only on the numbers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adiabaton::diagnostics::DiagnosticsReport;
use adiabaton::direct::RunManifest;
use adiabaton::shaping::{
    compression_report, copropagation_lag, shape_preservation, CompressionReport, ShapeReport,
};
use adiabaton::{
    mixing_angle, photon_invariant, pulse_metrics, AtomState, CharacteristicField, FieldState,
    MediumSpec, PulseMetrics, SimulationResult, Snapshot, SnapshotDiagnostics, SolverConfig,
    SolverKind, TauGrid, ZetaGrid,
};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::plots;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const TIMING_FILE: &str = "timing.json";

pub const SNAPSHOT_COLUMNS: [&str; 14] = [
    "tau", "gp_re", "gp_im", "gc_re", "gc_im", "a1_re", "a1_im", "a2_re", "a2_im", "a3_re",
    "a3_im", "theta", "V", "rho21",
];

/// Largest co-propagation lag searched, in samples.
const MAX_LAG: usize = 50;

/// Decimal text with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary file in the same directory and rename it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// One parsed snapshot table.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotTable {
    pub zeta: f64,
    pub tau: Vec<f64>,
    pub fields: FieldState,
    pub atoms: AtomState,
    pub theta: Vec<f64>,
    pub invariant: Vec<f64>,
    pub coherence: Vec<f64>,
}

pub fn format_snapshot(s: &Snapshot, grid: &TauGrid, medium: &MediumSpec) -> String {
    let theta = mixing_angle(&s.fields);
    let v = photon_invariant(&s.fields, medium);
    let rho = s.atoms.coherence();
    let mut out = String::with_capacity(grid.n_tau * 14 * 24 + 256);
    out.push_str(&format!(
        "# zeta\t{}\n# {}\n",
        fmt17(s.zeta),
        SNAPSHOT_COLUMNS.join("\t")
    ));
    for i in 0..grid.n_tau {
        let row = [
            grid.tau(i),
            s.fields.g_p[i].re,
            s.fields.g_p[i].im,
            s.fields.g_c[i].re,
            s.fields.g_c[i].im,
            s.atoms.a1[i].re,
            s.atoms.a1[i].im,
            s.atoms.a2[i].re,
            s.atoms.a2[i].im,
            s.atoms.a3[i].re,
            s.atoms.a3[i].im,
            theta[i],
            v[i],
            rho[i],
        ];
        let cells: Vec<String> = row.iter().map(|&x| fmt17(x)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

pub fn parse_snapshot(text: &str) -> Result<SnapshotTable> {
    let bad = |line: usize, message: String| CliError::Format {
        what: "snapshot table",
        line,
        message,
    };
    let mut lines = text.lines();
    let zeta_line = lines
        .next()
        .ok_or_else(|| bad(1, "empty document".into()))?;
    let zeta = zeta_line
        .strip_prefix("# zeta\t")
        .ok_or_else(|| bad(1, "expected `# zeta<TAB><value>`".into()))?
        .trim()
        .parse::<f64>()
        .map_err(|e| bad(1, format!("zeta: {e}")))?;
    if !zeta.is_finite() {
        return Err(bad(1, format!("zeta must be finite, got {zeta}")));
    }
    let header = lines
        .next()
        .ok_or_else(|| bad(2, "missing column header".into()))?;
    if header != format!("# {}", SNAPSHOT_COLUMNS.join("\t")) {
        return Err(bad(
            2,
            format!("column header must be `# {}`", SNAPSHOT_COLUMNS.join(" ")),
        ));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); SNAPSHOT_COLUMNS.len()];
    for (k, line) in lines.enumerate() {
        let n = k + 3;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != SNAPSHOT_COLUMNS.len() {
            return Err(bad(
                n,
                format!(
                    "expected {} columns, found {}",
                    SNAPSHOT_COLUMNS.len(),
                    cells.len()
                ),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .map_err(|e| bad(n, format!("column {}: {e}", SNAPSHOT_COLUMNS[c])))?;
            cols[c].push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(bad(3, "no data rows".into()));
    }
    let c = |re: usize, im: usize| -> Vec<C64> {
        cols[re]
            .iter()
            .zip(&cols[im])
            .map(|(&a, &b)| C64::new(a, b))
            .collect()
    };
    Ok(SnapshotTable {
        zeta,
        fields: FieldState {
            zeta,
            g_p: c(1, 2),
            g_c: c(3, 4),
        },
        atoms: AtomState {
            a1: c(5, 6),
            a2: c(7, 8),
            a3: c(9, 10),
        },
        tau: cols[0].clone(),
        theta: cols[11].clone(),
        invariant: cols[12].clone(),
        coherence: cols[13].clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotEntry {
    pub zeta: f64,
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub solver: SolverKind,
    pub crate_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    pub medium: MediumSpec,
    pub tau_grid: TauGrid,
    pub zeta_grid: ZetaGrid,
    pub solver_config: SolverConfig,
    /// False when the run stopped before `zeta_max`.
    pub valid: bool,
    pub snapshots: Vec<SnapshotEntry>,
    pub files: Vec<FileEntry>,
}

fn json_error(what: &'static str, e: serde_json::Error) -> CliError {
    CliError::Format {
        what,
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn manifest_json(m: &Manifest) -> String {
    serde_json::to_string_pretty(m).expect("manifest serializes") + "\n"
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let m: Manifest = serde_json::from_str(text).map_err(|e| json_error("manifest", e))?;
    if m.format_version != FORMAT_VERSION {
        return Err(CliError::Format {
            what: "manifest",
            line: 1,
            message: format!("unsupported format version {}", m.format_version),
        });
    }
    Ok(m)
}

/// Scalars recomputed from a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsDocument {
    pub solver: SolverKind,
    pub valid: bool,
    pub zeta_out: f64,
    /// `None` where the envelope has no pulse to measure.
    pub probe_in: Option<PulseMetrics>,
    pub probe_out: Option<PulseMetrics>,
    pub coupling_in: Option<PulseMetrics>,
    pub coupling_out: Option<PulseMetrics>,
    pub compression: Option<CompressionReport>,
    pub shape: Option<ShapeReport>,
    /// Largest `|lag|` of the probe against the coupling dip, in samples.
    pub copropagation_lag_max: i64,
    pub diagnostics: DiagnosticsReport,
}

impl MetricsDocument {
    /// Direct runs are also compared against the characteristic solution
    /// built from their entry snapshot, where that solution exists.
    pub fn compute(result: &SimulationResult) -> Result<Self> {
        let chi = match result.manifest.solver {
            SolverKind::Direct => {
                CharacteristicField::build(&result.input().fields, &result.tau_grid, &result.medium)
                    .ok()
            }
            SolverKind::Adiabatic => None,
        };
        let diagnostics = match chi
            .as_ref()
            .map(|c| DiagnosticsReport::new(result, Some(c)))
        {
            Some(Ok(d)) => d,
            _ => DiagnosticsReport::new(result, None)?,
        };
        let g = &result.tau_grid;
        let metrics = |y: Vec<f64>| pulse_metrics(&y, g).ok();
        Ok(MetricsDocument {
            solver: result.manifest.solver,
            valid: result.valid,
            zeta_out: result.output().zeta,
            probe_in: metrics(result.input().fields.probe_abs()),
            probe_out: metrics(result.output().fields.probe_abs()),
            coupling_in: metrics(result.input().fields.coupling_abs()),
            coupling_out: metrics(result.output().fields.coupling_abs()),
            compression: compression_report(result).ok(),
            shape: shape_preservation(result).ok(),
            copropagation_lag_max: copropagation_lag(result, MAX_LAG)
                .into_iter()
                .map(i64::abs)
                .max()
                .unwrap_or(0),
            diagnostics,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize") + "\n"
    }
}

pub fn parse_metrics(text: &str) -> Result<MetricsDocument> {
    serde_json::from_str(text).map_err(|e| json_error("metrics document", e))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PersistOptions<'a> {
    pub config: Option<&'a RunConfig>,
    pub emit_plots: bool,
}

/// Write `result` under `dir` and return the manifest path.
pub fn persist_result(
    result: &SimulationResult,
    dir: &Path,
    options: PersistOptions,
) -> Result<PathBuf> {
    if result.snapshots.is_empty() {
        return Err(CliError::validation(
            "snapshots",
            "a result without snapshots cannot be persisted",
        ));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut snapshots = Vec::with_capacity(result.snapshots.len());
    for (k, s) in result.snapshots.iter().enumerate() {
        let file = format!("snapshot_{k:04}.tsv");
        let text = format_snapshot(s, &result.tau_grid, &result.medium);
        write_atomic(&dir.join(&file), text.as_bytes())?;
        snapshots.push(SnapshotEntry {
            zeta: s.zeta,
            file,
            sha256: sha256_hex(text.as_bytes()),
        });
    }

    let mut files = Vec::new();
    let metrics = MetricsDocument::compute(result)?.to_json();
    write_atomic(&dir.join(METRICS_FILE), metrics.as_bytes())?;
    files.push(FileEntry {
        file: METRICS_FILE.into(),
        sha256: sha256_hex(metrics.as_bytes()),
    });

    if options.emit_plots {
        for (name, script) in plots::scripts(&snapshots) {
            let file = format!("{}/{name}", plots::PLOT_DIR);
            write_atomic(&dir.join(&file), script.as_bytes())?;
            files.push(FileEntry {
                sha256: sha256_hex(script.as_bytes()),
                file,
            });
        }
    }

    let timing =
        serde_json::json!({ "wall_time_s": result.manifest.wall_time_s }).to_string() + "\n";
    write_atomic(&dir.join(TIMING_FILE), timing.as_bytes())?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        solver: result.manifest.solver,
        crate_version: result.manifest.crate_version.clone(),
        config: options.config.cloned(),
        medium: result.medium,
        tau_grid: result.tau_grid,
        zeta_grid: result.zeta_grid,
        solver_config: result.manifest.config,
        valid: result.valid,
        snapshots,
        files,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = manifest_json(&manifest);
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Reload a persisted result, checking every snapshot against its hash.
pub fn load_result(dir: &Path) -> Result<(Manifest, SimulationResult)> {
    let manifest = parse_manifest(&read_text(&dir.join(MANIFEST_FILE))?)?;
    manifest.tau_grid.validate().map_err(|e| CliError::Format {
        what: "manifest",
        line: 0,
        message: e.to_string(),
    })?;
    if manifest.snapshots.is_empty() {
        return Err(CliError::Format {
            what: "manifest",
            line: 0,
            message: "no snapshots listed".into(),
        });
    }
    let grid = manifest.tau_grid;
    let mut snapshots = Vec::with_capacity(manifest.snapshots.len());
    let mut v0: Option<Vec<f64>> = None;
    for entry in &manifest.snapshots {
        let path = dir.join(&entry.file);
        let text = read_text(&path)?;
        if sha256_hex(text.as_bytes()) != entry.sha256 {
            return Err(CliError::Format {
                what: "snapshot table",
                line: 0,
                message: format!("{} does not match its manifest hash", entry.file),
            });
        }
        let table = parse_snapshot(&text)?;
        if table.tau.len() != grid.n_tau {
            return Err(CliError::Format {
                what: "snapshot table",
                line: 0,
                message: format!(
                    "{} has {} rows, grid has {}",
                    entry.file,
                    table.tau.len(),
                    grid.n_tau
                ),
            });
        }
        let v0 = v0.get_or_insert_with(|| photon_invariant(&table.fields, &manifest.medium));
        let diagnostics =
            SnapshotDiagnostics::evaluate(&table.fields, &table.atoms, v0, &grid, &manifest.medium);
        snapshots.push(Snapshot {
            zeta: table.zeta,
            fields: table.fields,
            atoms: table.atoms,
            diagnostics,
        });
    }
    let wall_time_s = read_text(&dir.join(TIMING_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v["wall_time_s"].as_f64())
        .unwrap_or(0.0);
    let result = SimulationResult {
        tau_grid: grid,
        zeta_grid: manifest.zeta_grid,
        medium: manifest.medium,
        snapshots,
        manifest: RunManifest {
            solver: manifest.solver,
            config: manifest.solver_config,
            crate_version: manifest.crate_version.clone(),
            wall_time_s,
        },
        valid: manifest.valid,
    };
    Ok((manifest, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
            -0.0,
        ] {
            let back: f64 = fmt17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn snapshot_header_is_checked() {
        assert!(matches!(
            parse_snapshot(""),
            Err(CliError::Format { line: 1, .. })
        ));
        assert!(matches!(
            parse_snapshot("# zeta\t1\n# tau\tgp_re\n"),
            Err(CliError::Format { line: 2, .. })
        ));
        let header = format!("# zeta\t0\n# {}\n", SNAPSHOT_COLUMNS.join("\t"));
        assert!(matches!(
            parse_snapshot(&header),
            Err(CliError::Format { line: 3, .. })
        ));
        let short = format!("{header}1\t2\n");
        assert!(matches!(
            parse_snapshot(&short),
            Err(CliError::Format { line: 3, .. })
        ));
    }

    #[test]
    fn hashes_are_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
