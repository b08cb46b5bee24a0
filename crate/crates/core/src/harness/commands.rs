//! The CLI commands as library functions. Each validates its config first, computes, and writes
//! its artifacts plus the resolved config, the versions manifest and `FORMATS.md` into `out`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{RunConfig, Scheme};
use super::criteria::{run_verify_with, CriterionReport, VerifyReport};
use super::formats::formats_markdown;
use super::HarnessError;
use crate::characteristics::trace_backward;
use crate::collision::CollisionModel;
use crate::gas_state::{DistributionField, GridSpec, VelocityGrid};
use crate::linear_ops::spectral_gap_estimate;
use crate::solver::{estimate_decay_rate, standard_bump, FieldSeries, RunSummary, Solver};
use crate::transport_semigroup::{remaining_mass_study, PathSampler};
use crate::Vec3;

/// Files written by a command and its JSON summary.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Run options shared by every command.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config: RunConfig,
    pub out: PathBuf,
    pub workers: usize,
}

impl RunContext {
    /// `--seed` and `--out` override the file; the output directory defaults to the config's.
    pub fn new(config: RunConfig, seed: Option<u64>, out: Option<PathBuf>, workers: usize) -> Self {
        let mut config = config;
        if let Some(seed) = seed {
            config.seed = seed;
        }
        if let Some(out) = out {
            config.output = out;
        }
        let out = config.output.clone();
        Self { config, out, workers }
    }
}

fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}

fn output(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Output(e.to_string())
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(ctx: &'a RunContext, command: &str) -> Result<Self, HarnessError> {
        fs::create_dir_all(&ctx.out).map_err(io(format!("creating {}", ctx.out.display())))?;
        let mut w = Self { dir: &ctx.out, files: Vec::new() };
        w.text("config.resolved.toml", &ctx.config.to_toml())?;
        let manifest = json!({
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": ctx.config.seed,
            "workers": ctx.workers,
            "target": format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            "formats": { "kfield": 1, "csv": 1, "summary": 1 },
        });
        w.json("manifest.json", &manifest)?;
        w.text("FORMATS.md", &formats_markdown())?;
        Ok(w)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), HarnessError> {
        let p = self.path(name);
        fs::write(&p, body).map_err(io(format!("writing {}", p.display())))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let body = serde_json::to_string_pretty(value).map_err(output)? + "\n";
        self.text(name, &body)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<(), HarnessError> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(output)?;
        for row in rows {
            w.serialize(row).map_err(output)?;
        }
        w.flush().map_err(io(format!("writing {}", p.display())))
    }

    fn finish(self, summary: serde_json::Value) -> Artifacts {
        Artifacts { files: self.files, summary }
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct NormRow {
    t: f64,
    norm: f64,
    mass: f64,
    min_value: f64,
}

/// `F` and the perturbation `F - mu` of one standard run, plus the run bookkeeping.
struct StandardRun {
    full: FieldSeries,
    perturbation: FieldSeries,
    iterations: usize,
    residuals: Vec<f64>,
    max_mass_rescale: f64,
}

fn standard_run(ctx: &RunContext, scheme: Scheme) -> Result<(Solver, StandardRun), HarnessError> {
    let resolved = ctx.config.validate()?;
    print_warnings(&resolved.warnings);
    let grid = ctx.config.grid()?;
    let mesh = ctx.config.mesh(&resolved.domain)?;
    let solver = Solver::new(resolved.solver, &resolved.model, &resolved.domain, grid.clone(), mesh.clone(), ctx.config.alpha)?;
    let f0 = standard_bump(grid.clone(), mesh.clone(), ctx.config.simulate.amplitude);
    let mu = DistributionField::maxwellian(grid, mesh);
    let run = match scheme {
        Scheme::Perturbed => {
            let pair = solver.solve_perturbed(&f0)?;
            StandardRun {
                full: pair.full(),
                perturbation: pair.perturbation(),
                iterations: pair.iterations(),
                residuals: pair.residuals.clone(),
                max_mass_rescale: pair.max_mass_rescale,
            }
        }
        Scheme::Positivity => {
            let run = solver.solve_positivity_scheme(&mu.with_values(mu.values() + f0.values()))?;
            StandardRun {
                perturbation: run.series.shifted(&-mu.values()),
                full: run.series,
                iterations: 1,
                residuals: Vec::new(),
                max_mass_rescale: run.max_mass_rescale,
            }
        }
    };
    Ok((solver, run))
}

fn norm_rows(solver: &Solver, run: &StandardRun) -> Vec<NormRow> {
    let w = &solver.config().weight;
    let norms = run.perturbation.norms(w);
    let masses = run.full.masses();
    norms
        .into_iter()
        .zip(masses)
        .enumerate()
        .map(|(n, ((t, norm), mass))| NormRow { t, norm, mass, min_value: run.full.values(n).min() })
        .collect()
}

/// Standard small-bump run with the configured scheme: norm series, summary, snapshots.
pub fn run_simulate(ctx: &RunContext) -> Result<Artifacts, HarnessError> {
    let (solver, run) = standard_run(ctx, ctx.config.simulate.scheme)?;
    let mut w = Writer::new(ctx, "simulate")?;
    let rows = norm_rows(&solver, &run);
    let m0 = rows[0].mass;
    let drift = rows.iter().skip(1).map(|r| (r.mass - m0).abs() / m0 / r.t).fold(0.0, f64::max);
    let fit = estimate_decay_rate(&rows.iter().map(|r| (r.t, r.norm)).collect::<Vec<_>>())?;
    let summary = RunSummary {
        relative_mass_drift_per_time: drift,
        max_mass_rescale: run.max_mass_rescale,
        lambda_hat: fit.lambda_hat,
        fit_quality: fit.fit_quality,
        min_value: run.full.min_value(),
        iterations: run.iterations,
        residuals: run.residuals.clone(),
    };
    w.csv("norms.csv", rows)?;
    w.json("summary.json", &summary)?;
    let horizon = solver.config().horizon;
    for t in ctx.config.simulate.snapshot_times.iter().filter(|t| **t <= horizon + 1e-12) {
        let p = w.path(&format!("snapshot_t{t:.3}.kfield"));
        run.full.at_time(*t).write_kfield(&p, *t)?;
    }
    Ok(w.finish(serde_json::to_value(&summary).map_err(output)?))
}

#[derive(Serialize)]
struct DecayRow {
    t: f64,
    norm: f64,
}

/// Norm series of the perturbative run and the fitted decay rate.
pub fn run_decay(ctx: &RunContext) -> Result<Artifacts, HarnessError> {
    let (solver, run) = standard_run(ctx, Scheme::Perturbed)?;
    let mut w = Writer::new(ctx, "decay")?;
    let norms = run.perturbation.norms(&solver.config().weight);
    let fit = estimate_decay_rate(&norms)?;
    let sampled: Vec<(f64, f64)> = [0.0, 1.0, 2.0, 4.0]
        .iter()
        .filter(|t| **t <= solver.config().horizon + 1e-12)
        .map(|t| (*t, run.perturbation.at_time(*t).weighted_sup_norm(&solver.config().weight)))
        .collect();
    let summary = json!({ "lambda_hat": fit.lambda_hat, "fit_quality": fit.fit_quality, "sampled_norms": sampled });
    w.csv("decay.csv", norms.iter().map(|&(t, norm)| DecayRow { t, norm }))?;
    w.json("decay.json", &summary)?;
    Ok(w.finish(summary))
}

#[derive(Serialize)]
struct FootprintRow {
    k: usize,
    hit_time: f64,
    x: f64,
    y: f64,
    z: f64,
    vin_x: f64,
    vin_y: f64,
    vin_z: f64,
    vout_x: f64,
    vout_y: f64,
    vout_z: f64,
}

/// Specular backward trajectory of the configured phase point.
pub fn run_trace(ctx: &RunContext) -> Result<Artifacts, HarnessError> {
    let resolved = ctx.config.validate()?;
    print_warnings(&resolved.warnings);
    let tc = &ctx.config.trace;
    let traj = trace_backward(&resolved.domain, tc.t, &Vec3::from(tc.x), &Vec3::from(tc.v), tc.max_rebounds)?;
    let mut w = Writer::new(ctx, "trace")?;
    w.csv(
        "footprints.csv",
        traj.footprints.iter().enumerate().map(|(k, f)| FootprintRow {
            k: k + 1,
            hit_time: f.hit_time,
            x: f.hit_point.x,
            y: f.hit_point.y,
            z: f.hit_point.z,
            vin_x: f.incoming_velocity.x,
            vin_y: f.incoming_velocity.y,
            vin_z: f.incoming_velocity.z,
            vout_x: f.post_reflection_velocity.x,
            vout_y: f.post_reflection_velocity.y,
            vout_z: f.post_reflection_velocity.z,
        }),
    )?;
    let summary = json!({
        "status": traj.status,
        "rebounds": traj.rebounds(),
        "terminal": [traj.terminal.x, traj.terminal.y, traj.terminal.z],
        "terminal_velocity": [traj.terminal_velocity.x, traj.terminal_velocity.y, traj.terminal_velocity.z],
    });
    w.json("trace.json", &summary)?;
    Ok(w.finish(summary))
}

/// Survival of path memory: fraction of paths still rebounding after `p` rebounds.
pub fn run_paths(ctx: &RunContext) -> Result<Artifacts, HarnessError> {
    let resolved = ctx.config.validate()?;
    print_warnings(&resolved.warnings);
    let pc = &ctx.config.paths;
    let sampler = PathSampler::new(&resolved.domain, &resolved.model, ctx.config.alpha)?.with_seed(ctx.config.seed);
    let rows = remaining_mass_study(&sampler, pc.t0, pc.samples, pc.p_max)?;
    let mut w = Writer::new(ctx, "paths")?;
    w.csv("survival.csv", rows.iter())?;
    let summary = json!({ "alpha": ctx.config.alpha, "t0": pc.t0, "samples": pc.samples, "seed": ctx.config.seed, "rows": rows });
    w.json("paths.json", &summary)?;
    Ok(w.finish(summary))
}

#[derive(Serialize)]
struct EigenRow {
    index: usize,
    eigenvalue: f64,
}

/// Eigenvalues of the discretized linearized operator.
pub fn run_spectrum(ctx: &RunContext) -> Result<Artifacts, HarnessError> {
    let resolved = ctx.config.validate()?;
    print_warnings(&resolved.warnings);
    let sc = &ctx.config.spectrum;
    let model = CollisionModel::new(ctx.config.collision.with_quadrature(sc.n_theta, sc.n_phi))
        .map_err(|e| HarnessError::Config(format!("spectrum: {e}")))?;
    let grid = VelocityGrid::new(GridSpec { v_max: sc.v_max, n_per_axis: sc.n_per_axis })
        .map_err(|e| HarnessError::Config(format!("spectrum: {e}")))?;
    let report = spectral_gap_estimate(&model, &grid)?;
    let mut w = Writer::new(ctx, "spectrum")?;
    w.csv("eigenvalues.csv", report.eigenvalues.iter().enumerate().map(|(index, &eigenvalue)| EigenRow { index, eigenvalue }))?;
    w.json("spectrum.json", &report)?;
    Ok(w.finish(serde_json::to_value(&report).map_err(output)?))
}

/// Acceptance suite; prints one line per criterion as it completes.
pub fn run_verify_command(ctx: &RunContext, filter: Option<&str>) -> Result<(VerifyReport, Artifacts), HarnessError> {
    let resolved = ctx.config.validate()?;
    print_warnings(&resolved.warnings);
    let report = run_verify_with(filter, |r: &CriterionReport| println!("{}", r.line()))?;
    let mut w = Writer::new(ctx, "verify")?;
    w.json("verify.json", &report)?;
    let summary = serde_json::to_value(&report).map_err(output)?;
    Ok((report, w.finish(summary)))
}
