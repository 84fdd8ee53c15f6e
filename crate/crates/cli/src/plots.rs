//! Gnuplot scripts for a persisted result. Run them from the result
//! directory, e.g. `gnuplot plots/envelopes.gp`; each writes a PNG next to
//! itself.

use crate::persist::SnapshotEntry;

pub const PLOT_DIR: &str = "plots";

fn header(output: &str, size: &str) -> String {
    format!("set terminal pngcairo size {size} enhanced\nset output '{PLOT_DIR}/{output}'\nset xlabel 'tau'\nset key outside right\n")
}

/// One `plot` clause per snapshot, `column` being a gnuplot `using` expression.
fn per_snapshot(snapshots: &[SnapshotEntry], column: &str) -> String {
    let clauses: Vec<String> = snapshots
        .iter()
        .map(|s| {
            format!(
                "'{}' using 1:{column} with lines title 'zeta = {}'",
                s.file, s.zeta
            )
        })
        .collect();
    format!("plot {}\n", clauses.join(", \\\n     "))
}

/// Script names and contents.
pub fn scripts(snapshots: &[SnapshotEntry]) -> Vec<(&'static str, String)> {
    let gp = "(sqrt($2**2 + $3**2))";
    let gc = "(sqrt($4**2 + $5**2))";

    let mut envelopes = header("envelopes.png", "1000,900");
    envelopes.push_str("set multiplot layout 2,1\nset ylabel '|g_p|'\n");
    envelopes.push_str(&per_snapshot(snapshots, gp));
    envelopes.push_str("set ylabel '|g_c|'\n");
    envelopes.push_str(&per_snapshot(snapshots, gc));
    envelopes.push_str("unset multiplot\n");

    let mut coherence = header("coherence.png", "1000,500");
    coherence.push_str("set ylabel '|rho_{21}|'\n");
    coherence.push_str(&per_snapshot(snapshots, "14"));

    let mut theta = header("theta.png", "1000,500");
    theta.push_str("set ylabel 'theta'\nset yrange [0:pi/2]\n");
    theta.push_str(&per_snapshot(snapshots, "12"));

    // probe magnitude over the (tau, zeta) plane
    let mut surface = header("probe_surface.png", "1000,800");
    surface.push_str("set ylabel 'zeta'\nset zlabel '|g_p|'\nunset key\nset view 60,30\n");
    let clauses: Vec<String> = snapshots
        .iter()
        .map(|s| {
            format!(
                "'{}' using 1:({}):{gp} with lines lc rgb 'black'",
                s.file, s.zeta
            )
        })
        .collect();
    surface.push_str(&format!("splot {}\n", clauses.join(", \\\n      ")));

    vec![
        ("envelopes.gp", envelopes),
        ("coherence.gp", coherence),
        ("theta.gp", theta),
        ("probe_surface.gp", surface),
    ]
}
