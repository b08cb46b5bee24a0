//! Generated description of every file the commands write.

/// Contents of `FORMATS.md`. Written into every output directory; the repository copy is kept
/// identical by a test.
pub fn formats_markdown() -> String {
    let mut s = String::from(
        "# Output formats\n\n\
         Generated by `kinetic_maxwell::harness::formats_markdown`; do not edit by hand.\n\n\
         Every command writes into its output directory (`--out`, else `output` from the config):\n\n\
         | file | content |\n|---|---|\n\
         | `config.resolved.toml` | the full configuration after defaults and `--seed` / `--out` overrides; loads back unchanged |\n\
         | `manifest.json` | `package`, `version`, `command`, `seed`, `workers`, `target`, format `formats` versions |\n\
         | `FORMATS.md` | this file |\n\n\
         CSV files have a header row, comma separators, and floats in shortest round-trip form.\n\n",
    );
    for (title, body) in SECTIONS {
        s.push_str(&format!("## {title}\n\n{body}\n"));
    }
    s
}

const SECTIONS: [(&str, &str); 7] = [
    (
        "simulate",
        "`norms.csv`: `t`, `norm` (weighted sup-norm of `F - mu`), `mass` (total mass of `F`), \
         `min_value` (minimum of `F` over cells and nodes), one row per time step.\n\n\
         `summary.json`: `relative_mass_drift_per_time`, `max_mass_rescale`, `lambda_hat`, \
         `fit_quality`, `min_value`, `iterations`, `residuals` (one per outer iteration).\n\n\
         `snapshot_t<time>.kfield`: snapshot of `F` at each configured time within the horizon.\n",
    ),
    (
        "decay",
        "`decay.csv`: `t`, `norm` (weighted sup-norm of `F - mu`), one row per time step.\n\n\
         `decay.json`: `lambda_hat`, `fit_quality`, `sampled_norms` as `[t, norm]` pairs at \
         `t = 0, 1, 2, 4` within the horizon.\n",
    ),
    (
        "trace",
        "`footprints.csv`: `k` (rebound number from 1), `hit_time` (accumulated backward time), \
         `x`, `y`, `z` (wall point), `vin_x`, `vin_y`, `vin_z` (velocity arriving at the wall), \
         `vout_x`, `vout_y`, `vout_z` (velocity after the mirror).\n\n\
         `trace.json`: `status` (`ReachedInitialPlane`, `GrazingEncountered`, `ReboundCapExceeded`), \
         `rebounds`, `terminal`, `terminal_velocity`.\n",
    ),
    (
        "paths",
        "`survival.csv`: `p`, `survival` (fraction of paths whose rebound `p + 1` still happens \
         within `t0`), `stderr` (binomial standard error).\n\n\
         `paths.json`: `alpha`, `t0`, `samples`, `seed`, `rows` (the CSV rows).\n",
    ),
    (
        "spectrum",
        "`eigenvalues.csv`: `index`, `eigenvalue` of the symmetrized discrete linearized operator, \
         largest first.\n\n\
         `spectrum.json`: `eigenvalues`, `kernel_dim`, `gap`, `gap_tol`, `asymmetry`, \
         `kernel_rayleigh`, `kernel_residual`, `kernel_overlap`.\n",
    ),
    (
        "verify",
        "`verify.json`: `passed`, and `criteria`, a list of `id`, `slug`, `title`, `passed`, \
         `seconds`, `budget_seconds`, `measured` (name to value), `failures` (failed clauses).\n",
    ),
    (
        "kfield",
        "Binary snapshot of a distribution field. The first line is a JSON header terminated by \
         `\\n`: `format` (`\"kfield\"`), `version` (1), `grid` (`v_max`, `n_per_axis`), `mesh` \
         (`n_per_axis`, `subsamples`), `n_cells`, `n_nodes`, `time`. It is followed by \
         `n_cells * n_nodes` little-endian `f64` values, cell-major and node-minor. Velocity node \
         `(i, j, k)` has index `(i n + j) n + k` with coordinates `((2 i + 1 - n) / 2) h`, \
         `h = 2 v_max / n`.\n",
    ),
];
