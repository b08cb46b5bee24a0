//! The acceptance checks. Each check builds its own inputs at fixed resolutions and seeds,
//! measures, and compares against its stated tolerance and runtime budget.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::alpha_threshold;
use super::HarnessError;
use crate::characteristics::trace_backward;
use crate::collision::{equilibrium_tolerance, k_inf_from, CollisionModel, CollisionSpec};
use crate::gas_state::{c_mu, maxwellian, DistributionField, GridSpec, Interp, MeshSpec, SpatialMesh, VelocityGrid, Weight};
use crate::geometry::Domain;
use crate::linear_ops::{named_constants, spectral_gap_estimate, ASYMMETRY_TOL};
use crate::solver::{
    bump_profile, estimate_decay_rate, solve_transport_inflow, standard_bump, transport_inflow_rk4, InflowProblem, PositivityRun,
    SolutionPair, Solver, SolverConfig,
};
use crate::transport_semigroup::{
    enumerate_ip_rp, path_rng, rayleigh_chi_square, remaining_mass_study, sample_diffuse_velocity, BoundarySamplingMeasure,
    DiffuseRule, PathSampler,
};
use crate::Vec3;

/// Static description of one criterion.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub slug: &'static str,
    pub title: &'static str,
    pub budget_seconds: f64,
}

pub const CRITERIA: [Criterion; 13] = [
    Criterion { id: 1, slug: "constants-threshold", title: "accommodation threshold constant", budget_seconds: 1.0 },
    Criterion { id: 2, slug: "constants-moments", title: "moment roots alpha_a and alpha_c", budget_seconds: 5.0 },
    Criterion { id: 3, slug: "constants-kinf", title: "k_inf arithmetic and weight gate", budget_seconds: 1.0 },
    Criterion { id: 4, slug: "boundary", title: "diffuse wall normalization and sampler", budget_seconds: 30.0 },
    Criterion { id: 5, slug: "equilibrium", title: "equilibrium annihilation and its convergence", budget_seconds: 180.0 },
    Criterion { id: 6, slug: "spectrum", title: "spectral structure of the linearized operator", budget_seconds: 120.0 },
    Criterion { id: 7, slug: "geometry", title: "exit times and speed conservation", budget_seconds: 30.0 },
    Criterion { id: 8, slug: "semigroup", title: "Monte Carlo semigroup against enumeration", budget_seconds: 300.0 },
    Criterion { id: 9, slug: "path-memory", title: "loss of path memory with rebounds", budget_seconds: 300.0 },
    Criterion { id: 10, slug: "conservation-decay", title: "nonlinear mass conservation and decay", budget_seconds: 900.0 },
    Criterion { id: 11, slug: "positivity", title: "positivity and equilibrium fixed point", budget_seconds: 900.0 },
    Criterion { id: 12, slug: "cross-validation", title: "perturbative and positivity schemes agree", budget_seconds: 900.0 },
    Criterion { id: 13, slug: "inflow", title: "transport with inflow closed form", budget_seconds: 60.0 },
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub slug: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub measured: BTreeMap<String, f64>,
    /// Which clauses failed, empty on a pass.
    pub failures: Vec<String>,
}

impl CriterionReport {
    /// One human-readable line, `PASS`/`FAIL` first.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let values: Vec<String> = self.measured.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        let mut s = format!("{verdict} {:>2} {:<20} {:>7.1}s  {}", self.id, self.slug, self.seconds, values.join(" "));
        if !self.failures.is_empty() {
            s.push_str(&format!("  [failed: {}]", self.failures.join("; ")));
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

/// Criteria selected by a filter: comma-separated ids or slug substrings; `None` selects all.
pub fn select(filter: Option<&str>) -> Result<Vec<Criterion>, HarnessError> {
    let Some(filter) = filter else {
        return Ok(CRITERIA.to_vec());
    };
    let terms: Vec<&str> = filter.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let chosen: Vec<Criterion> = CRITERIA
        .iter()
        .filter(|c| terms.iter().any(|t| t.parse::<usize>().map_or(c.slug.contains(t), |id| id == c.id)))
        .copied()
        .collect();
    if chosen.is_empty() {
        return Err(HarnessError::Config(format!("filter {filter:?} selects no criterion")));
    }
    Ok(chosen)
}

/// Measured values and failed clauses of one check.
#[derive(Default)]
struct Outcome {
    measured: BTreeMap<String, f64>,
    failures: Vec<String>,
}

impl Outcome {
    fn record(&mut self, key: &str, value: f64) -> f64 {
        self.measured.insert(key.to_string(), value);
        value
    }

    fn require(&mut self, ok: bool, clause: impl Into<String>) {
        if !ok {
            self.failures.push(clause.into());
        }
    }
}

/// Shared discretization and runs for the nonlinear checks.
#[derive(Default)]
pub struct Verifier {
    solver: OnceLock<Result<Solver, String>>,
    pair: OnceLock<Result<SolutionPair, String>>,
    matched: OnceLock<Result<PositivityRun, String>>,
}

/// Configuration of the nonlinear checks: ball of radius 1, hard spheres, `alpha = 0.9`.
pub fn standard_solver() -> Result<Solver, String> {
    let domain = Domain::ball(1.0);
    let model = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(4, 4)).map_err(|e| e.to_string())?;
    let grid = Arc::new(VelocityGrid::new(GridSpec { v_max: 3.6, n_per_axis: 6 }).map_err(|e| e.to_string())?);
    let mesh = Arc::new(SpatialMesh::new(&domain, MeshSpec { n_per_axis: 3, subsamples: 3 }).map_err(|e| e.to_string())?);
    Solver::new(SolverConfig::test_resolution(), &model, &domain, grid, mesh, 0.9).map_err(|e| e.to_string())
}

/// Amplitude of the standard bump in the nonlinear checks.
pub const STANDARD_AMPLITUDE: f64 = 0.05;

impl Verifier {
    pub fn new() -> Self {
        Self::default()
    }

    fn solver(&self) -> Result<&Solver, String> {
        self.solver.get_or_init(standard_solver).as_ref().map_err(Clone::clone)
    }

    fn bump(&self) -> Result<DistributionField, String> {
        let s = self.solver()?;
        Ok(standard_bump(s.grid().clone(), s.mesh().clone(), STANDARD_AMPLITUDE))
    }

    fn pair(&self) -> Result<&SolutionPair, String> {
        self.pair
            .get_or_init(|| {
                let s = self.solver()?;
                s.solve_perturbed(&self.bump()?).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Positivity scheme from `mu + f0` with the same `f0` as the perturbative run.
    fn matched(&self) -> Result<&PositivityRun, String> {
        self.matched
            .get_or_init(|| {
                let s = self.solver()?;
                let mu = DistributionField::maxwellian(s.grid().clone(), s.mesh().clone());
                s.solve_positivity_scheme(&mu.with_values(mu.values() + self.bump()?.values())).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn run(&self, c: &Criterion) -> CriterionReport {
        let start = Instant::now();
        let mut out = Outcome::default();
        let result = match c.id {
            1 => threshold(&mut out),
            2 => moments(&mut out),
            3 => kinf(&mut out),
            4 => boundary(&mut out),
            5 => equilibrium(&mut out),
            6 => spectrum(&mut out),
            7 => geometry(&mut out),
            8 => semigroup(&mut out),
            9 => path_memory(&mut out),
            10 => self.conservation_decay(&mut out),
            11 => self.positivity(&mut out),
            12 => self.cross_validation(&mut out),
            13 => inflow(&mut out),
            _ => Err(format!("unknown criterion {}", c.id)),
        };
        if let Err(e) = result {
            out.failures.push(format!("error: {e}"));
        }
        let seconds = start.elapsed().as_secs_f64();
        out.require(seconds < c.budget_seconds, format!("runtime {seconds:.1}s over {}s", c.budget_seconds));
        CriterionReport {
            id: c.id,
            slug: c.slug,
            title: c.title,
            passed: out.failures.is_empty(),
            seconds,
            budget_seconds: c.budget_seconds,
            measured: out.measured,
            failures: out.failures,
        }
    }

    fn conservation_decay(&self, out: &mut Outcome) -> Result<(), String> {
        let s = self.solver()?;
        let pair = self.pair()?;
        let full = pair.full();
        let masses = full.masses();
        let drift = (1..masses.len()).map(|n| (masses[n] - masses[0]).abs() / masses[0] / full.time(n)).fold(0.0, f64::max);
        out.record("mass_drift_per_time", drift);
        out.require(drift < 1e-8, "relative mass drift per unit time < 1e-8");
        let f = pair.perturbation();
        let norms = f.norms(&s.config().weight);
        let sampled: Vec<f64> =
            [0.0, 1.0, 2.0, 4.0].iter().map(|t| f.at_time(*t).weighted_sup_norm(&s.config().weight)).collect();
        for (t, n) in [0, 1, 2, 4].iter().zip(&sampled) {
            out.record(&format!("norm_t{t}"), *n);
        }
        out.require(sampled.windows(2).all(|w| w[1] <= w[0]), "norm nonincreasing on t = 0, 1, 2, 4");
        let fit = estimate_decay_rate(&norms).map_err(|e| e.to_string())?;
        out.record("lambda_hat", fit.lambda_hat);
        out.record("fit_quality", fit.fit_quality);
        out.record("outer_iterations", pair.iterations() as f64);
        out.require(fit.lambda_hat > 0.0, "fitted decay rate positive");
        Ok(())
    }

    fn positivity(&self, out: &mut Outcome) -> Result<(), String> {
        let s = self.solver()?;
        let mu = DistributionField::maxwellian(s.grid().clone(), s.mesh().clone());
        let lifted = DistributionField::from_fn(s.grid().clone(), s.mesh().clone(), |x, v| {
            maxwellian(v) * (1.0 + STANDARD_AMPLITUDE * bump_profile(x))
        });
        let run = s.solve_positivity_scheme(&lifted).map_err(|e| e.to_string())?;
        out.record("min_F", run.min_value);
        out.require(run.min_value >= 0.0, "min F >= 0 at every stored time");
        let eq = s.solve_positivity_scheme(&mu).map_err(|e| e.to_string())?;
        let still = crate::solver::FieldSeries::constant(&mu, s.config().dt, s.steps());
        let drift = eq.series.max_distance(&still, &s.config().weight);
        out.record("equilibrium_drift", drift);
        out.require(drift <= s.config().fp_tol, "F0 = mu stays mu to fp_tol");
        Ok(())
    }

    fn cross_validation(&self, out: &mut Outcome) -> Result<(), String> {
        let s = self.solver()?;
        let pair_full = self.pair()?.full();
        let run = self.matched()?;
        let tol = 5.0 * s.config().fp_tol;
        let gap = pair_full.max_distance(&run.series, &s.config().weight);
        out.record("max_weighted_gap", gap);
        let mut probe_gap: f64 = 0.0;
        for t in [1.0, 2.0, 4.0] {
            let (a, b) = (pair_full.at_time(t), run.series.at_time(t));
            for (x, v) in probe_points() {
                probe_gap = probe_gap.max((a.eval(&x, &v, Interp::Ratio) - b.eval(&x, &v, Interp::Ratio)).abs());
            }
        }
        out.record("probe_gap", probe_gap);
        out.record("tolerance", tol);
        out.require(gap <= tol && probe_gap <= tol, "schemes agree within 5 fp_tol");
        Ok(())
    }
}

fn probe_points() -> [(Vec3, Vec3); 5] {
    [
        (Vec3::zeros(), Vec3::new(0.6, 0.0, 0.0)),
        (Vec3::new(0.3, 0.2, -0.1), Vec3::new(-0.6, 0.6, 0.0)),
        (Vec3::new(-0.4, 0.0, 0.3), Vec3::new(1.2, -0.6, 0.6)),
        (Vec3::new(0.0, -0.5, 0.0), Vec3::new(0.0, 0.0, -1.8)),
        (Vec3::new(0.2, 0.2, 0.2), Vec3::new(0.6, 0.6, 0.6)),
    ]
}

/// Run the selected criteria in order.
pub fn run_verify(filter: Option<&str>) -> Result<VerifyReport, HarnessError> {
    run_verify_with(filter, |_| {})
}

/// [`run_verify`] with a callback after each criterion (used to stream lines).
pub fn run_verify_with(filter: Option<&str>, mut each: impl FnMut(&CriterionReport)) -> Result<VerifyReport, HarnessError> {
    let chosen = select(filter)?;
    let verifier = Verifier::new();
    let criteria: Vec<CriterionReport> = chosen
        .iter()
        .map(|c| {
            let r = verifier.run(c);
            each(&r);
            r
        })
        .collect();
    Ok(VerifyReport { passed: criteria.iter().all(|r| r.passed), criteria })
}

fn threshold(out: &mut Outcome) -> Result<(), String> {
    let model = CollisionModel::hard_spheres();
    let w = Weight::default();
    let a = alpha_threshold();
    let at = named_constants(&model, a, 0.75, &w).map_err(|e| e.to_string())?;
    let err = out.record("limit_error_at_threshold", (at.c_alpha_zeta_limit - 1.0).abs());
    out.require(err < 1e-12, "3(1 - alpha)(1 + alpha) = 1 at sqrt(2/3) within 1e-12");
    let above = named_constants(&model, a + 1e-3, 0.75, &w).map_err(|e| e.to_string())?;
    let below = named_constants(&model, a - 1e-3, 0.75, &w).map_err(|e| e.to_string())?;
    out.require(above.alpha_admissible && !below.alpha_admissible, "admissibility flips across the threshold");
    Ok(())
}

fn moments(out: &mut Outcome) -> Result<(), String> {
    let c = named_constants(&CollisionModel::hard_spheres(), 0.9, 0.75, &Weight::default()).map_err(|e| e.to_string())?;
    out.record("alpha_a", c.alpha_a);
    out.record("alpha_c", c.alpha_c);
    out.require((c.alpha_a - 10.0).abs() <= 1e-6, "alpha_a = 10 +- 1e-6");
    out.require((c.alpha_c - 5.0).abs() <= 1e-6, "alpha_c = 5 +- 1e-6");
    Ok(())
}

fn kinf(out: &mut Outcome) -> Result<(), String> {
    let m = CollisionModel::hard_spheres();
    out.record("k_inf", m.k_inf());
    out.record("b_inf", m.b_inf());
    out.record("l_b", m.l_b());
    out.require(k_inf_from(1.0, 1.0, 4.0 * PI) == 6.0, "k_inf = 6 exactly from b_inf = 1, l_b = 4 pi");
    out.require((m.k_inf() - 6.0).abs() <= 1e-10, "hard-sphere model k_inf = 6 within 1e-10");
    out.require((m.b_inf() - 1.0).abs() <= 1e-10 && (m.l_b() - 4.0 * PI).abs() <= 1e-10, "b_inf = 1 and l_b = 4 pi within 1e-10");
    let gate = |k: f64| Weight::Polynomial { k }.check_admissible(m.k_inf()).is_ok();
    out.require(!gate(6.0) && gate(6.01), "weight gate rejects k = 6 and accepts k = 6.01");
    Ok(())
}

fn boundary(out: &mut Outcome) -> Result<(), String> {
    let err = out.record("c_mu_error", (c_mu() - (2.0 * PI).sqrt()).abs());
    out.require(err <= 1e-8, "c_mu = sqrt(2 pi) +- 1e-8");
    let domain = Domain::ellipsoid(1.0, 0.8, 0.6);
    let y = domain.radial_boundary_point(&Vec3::new(1.0, 2.0, 2.0));
    let measure = BoundarySamplingMeasure::new(&domain, &y).map_err(|e| e.to_string())?;
    let mass_err = out.record("measure_mass_error", (measure.total_mass() - 1.0).abs());
    out.require(mass_err <= 1e-6, "wall measure has mass 1 +- 1e-6");
    let samples = 1_000_000;
    let mut rng = path_rng(2024, 0, 0);
    let normals: Vec<f64> =
        (0..samples).map(|_| sample_diffuse_velocity(&measure.normal, &mut rng).dot(&measure.normal)).collect();
    let n = samples as f64;
    let mean = normals.iter().sum::<f64>() / n;
    let var = normals.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let z = out.record("normal_mean_z", (mean - (PI / 2.0).sqrt()) / (var / n).sqrt());
    out.record("normal_mean", mean);
    out.require(z.abs() <= 3.0, "E[v.n] = sqrt(pi/2) within 3 standard errors");
    let (_, p) = rayleigh_chi_square(&normals, 50);
    out.record("rayleigh_p_value", p);
    out.require(p > 1e-3, "Rayleigh chi-square p > 0.001");
    Ok(())
}

/// `max |Q(mu, mu)|`, `max |L(phi_a mu)|` for the five invariants, each also relative to the
/// declared tolerance, over `nodes`.
fn equilibrium_residuals(model: &CollisionModel, grid: &VelocityGrid, nodes: &[usize]) -> ([f64; 6], [f64; 6]) {
    let mu = grid.maxwellian().to_vec();
    let s6 = 6f64.sqrt();
    let phis: Vec<Vec<f64>> = (0..5)
        .map(|a| {
            grid.nodes()
                .iter()
                .zip(&mu)
                .map(|(v, m)| {
                    m * if a == 0 {
                        1.0
                    } else if a <= 3 {
                        v[a - 1]
                    } else {
                        (v.norm_squared() - 3.0) / s6
                    }
                })
                .collect()
        })
        .collect();
    let mut fs: Vec<&[f64]> = vec![&mu];
    fs.extend(phis.iter().map(Vec::as_slice));
    let pairs: Vec<(usize, usize)> = (1..6).flat_map(|a| [(0, a), (a, 0)]).collect();
    let gains = model.gain_integrals(grid, Interp::Direct, &fs, &pairs, nodes);
    let nu = model.frequency_on_grid(grid);
    let (mut abs, mut rel) = ([0.0f64; 6], [0.0f64; 6]);
    for (a, phi) in phis.iter().enumerate() {
        let q = model.loss_rate(grid, phi);
        for (p, &i) in nodes.iter().enumerate() {
            let l = gains[2 * a][p] + gains[2 * a + 1][p] - mu[i] * q[i] - nu[i] * phi[i];
            let tol = equilibrium_tolerance(nu[i], grid.n_per_axis());
            abs[a + 1] = abs[a + 1].max(l.abs());
            rel[a + 1] = rel[a + 1].max(l.abs() / tol);
            if a == 0 {
                // L(mu) = 2 Q(mu, mu).
                abs[0] = abs[0].max(0.5 * l.abs());
                rel[0] = rel[0].max(0.5 * l.abs() / tol);
            }
        }
    }
    (abs, rel)
}

fn equilibrium(out: &mut Outcome) -> Result<(), String> {
    let model = CollisionModel::hard_spheres();
    let names = ["Q_mu_mu", "L_mu", "L_vx_mu", "L_vy_mu", "L_vz_mu", "L_energy_mu"];
    let mut at = Vec::new();
    for n in [16, 24] {
        let grid = VelocityGrid::new(GridSpec { v_max: 6.0, n_per_axis: n }).map_err(|e| e.to_string())?;
        // First octant of the bulk |v| <= 1.5; the discretization is mirror symmetric.
        let nodes: Vec<usize> =
            (0..grid.len()).filter(|&k| grid.node(k).norm() <= 1.5 && grid.node(k).iter().all(|c| *c > 0.0)).collect();
        let (abs, rel) = equilibrium_residuals(&model, &grid, &nodes);
        for (name, (a, r)) in names.iter().zip(abs.iter().zip(&rel)) {
            out.record(&format!("{name}_n{n}"), *a);
            out.require(*r < 1.0, format!("{name} below tol_Q at n = {n}"));
        }
        at.push(abs);
    }
    for (k, name) in names.iter().enumerate() {
        let shrink = out.record(&format!("{name}_shrink"), at[0][k] / at[1][k]);
        out.require(shrink >= 2.0, format!("{name} shrinks >= 2x from 16 to 24 (got {shrink:.3})"));
    }
    Ok(())
}

fn spectrum(out: &mut Outcome) -> Result<(), String> {
    let model = CollisionModel::hard_spheres().with_quadrature(8, 8).map_err(|e| e.to_string())?;
    let grid = VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: 12 }).map_err(|e| e.to_string())?;
    let r = spectral_gap_estimate(&model, &grid).map_err(|e| e.to_string())?;
    out.record("kernel_dim", r.kernel_dim as f64);
    out.record("gap", r.gap);
    out.record("gap_tol", r.gap_tol);
    out.record("asymmetry", r.asymmetry);
    out.record("kernel_overlap", r.kernel_overlap);
    out.require(r.kernel_dim == 5, "exactly five near-zero eigenvalues");
    out.require(r.gap > 0.0 && r.eigenvalues[5..].iter().all(|l| *l < 0.0), "all other eigenvalues strictly negative");
    out.require(r.asymmetry < ASYMMETRY_TOL, "symmetrization defect below tolerance");
    Ok(())
}

fn geometry(out: &mut Outcome) -> Result<(), String> {
    let ball = Domain::ball(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x = loop {
            let y = Vec3::from_fn(|_, _| 2.0 * rng.random::<f64>() - 1.0);
            if y.norm() < 1.0 {
                break y;
            }
        };
        let v = Vec3::from_fn(|_, _| rng.sample(StandardNormal));
        let marched = ball.backward_exit_time(&x, &v).map_err(|e| e.to_string())?.time;
        let exact = ball.analytic_exit_time(&x, &v).ok_or("ball has a closed form")?;
        worst = worst.max((marched - exact).abs() / exact);
    }
    out.record("exit_time_max_rel_error", worst);
    out.require(worst <= 1e-10, "ball exit time matches the chord formula within 1e-10");
    let mut speed: f64 = 0.0;
    let mut rebounds = 0usize;
    for domain in [Domain::ball(1.0), Domain::ellipsoid(1.0, 0.8, 0.6)] {
        for _ in 0..200 {
            let x = loop {
                let y = Vec3::from_fn(|_, _| 2.0 * rng.random::<f64>() - 1.0);
                if domain.is_interior(&y) {
                    break y;
                }
            };
            let v = Vec3::from_fn(|_, _| rng.sample(StandardNormal));
            let traj = trace_backward(&domain, 5.0, &x, &v, 10_000).map_err(|e| e.to_string())?;
            rebounds += traj.rebounds();
            for fp in &traj.footprints {
                speed = speed.max((fp.post_reflection_velocity.norm() - v.norm()).abs() / v.norm());
            }
        }
    }
    out.record("speed_max_rel_drift", speed);
    out.record("rebounds_checked", rebounds as f64);
    out.require(speed <= 1e-10, "speed conserved to 1e-10 across all rebounds");
    Ok(())
}

fn semigroup(out: &mut Outcome) -> Result<(), String> {
    let domain = Domain::ball(1.0);
    let model = CollisionModel::hard_spheres();
    let rules = DiffuseRule::standard_levels();
    let f0 = |x: &Vec3, v: &Vec3| (1.0 - x.norm_squared()).max(0.0) * maxwellian(v) * (1.0 + 0.3 * v.x);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for probe in 0..20 {
        let alpha = if probe % 2 == 0 { 1.0 } else { 0.9 };
        let p = [1, 2, 1, 2, 3][probe % 5];
        let sampler = PathSampler::new(&domain, &model, alpha).map_err(|e| e.to_string())?.with_seed(11);
        let x = loop {
            let y = Vec3::from_fn(|_, _| 1.9 * rng.random::<f64>() - 0.95);
            if y.norm() < 0.95 && y.norm() > 0.5 {
                break y;
            }
        };
        let v = Vec3::from_fn(|_, _| 1.2 * (2.0 * rng.random::<f64>() - 1.0));
        let t = if p == 3 { 0.25 + 0.35 * rng.random::<f64>() } else { 0.25 + 0.65 * rng.random::<f64>() };
        let exact = enumerate_ip_rp(&sampler, t, &x, &v, p, &f0, &rules).map_err(|e| e.to_string())?;
        let mc = sampler.estimate(t, &x, &v, &f0, 100_000, probe as u64, Some(p)).map_err(|e| e.to_string())?;
        let z = (mc.value - exact.ip) / (mc.stderr + 1e-12 * exact.ip.abs() + f64::MIN_POSITIVE);
        worst = worst.max(z.abs());
    }
    out.record("max_abs_z", worst);
    out.require(worst <= 3.0, "all 20 probes within 3 standard errors");
    Ok(())
}

/// Frozen calibration pin: survival after two rebounds within `t0 = 1` at `alpha = 1`. The
/// recorded run (seed 3, 10^5 paths) gave 0.03597; the pin adds three binomial standard errors.
pub const SURVIVAL_PIN_P2: f64 = 0.0378;

fn path_memory(out: &mut Outcome) -> Result<(), String> {
    let domain = Domain::ball(1.0);
    let model = CollisionModel::hard_spheres();
    let study = |alpha: f64| -> Result<Vec<f64>, String> {
        let sampler = PathSampler::new(&domain, &model, alpha).map_err(|e| e.to_string())?.with_seed(3);
        let rows = remaining_mass_study(&sampler, 1.0, 100_000, 12).map_err(|e| e.to_string())?;
        Ok(rows.into_iter().map(|r| r.survival).collect())
    };
    let full = study(1.0)?;
    let partial = study(0.85)?;
    for (p, s) in full.iter().enumerate().take(4) {
        out.record(&format!("survival_p{p}_alpha1"), *s);
    }
    for (p, s) in partial.iter().enumerate().take(4) {
        out.record(&format!("survival_p{p}_alpha085"), *s);
    }
    let decreasing = |s: &[f64]| s.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    out.require(decreasing(&full) && decreasing(&partial), "survival strictly decreasing in p while positive");
    out.require(full[2] <= SURVIVAL_PIN_P2, "survival at p = 2 below the frozen pin");
    // Decay speed in p: least-squares slope of log survival over the positive entries.
    let rate = |s: &[f64]| -> Result<f64, String> {
        let pts: Vec<(f64, f64)> = s.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(p, v)| (p as f64, *v)).collect();
        estimate_decay_rate(&pts).map(|f| f.lambda_hat).map_err(|e| e.to_string())
    };
    let (r1, r085) = (rate(&full)?, rate(&partial)?);
    out.record("decay_rate_alpha1", r1);
    out.record("decay_rate_alpha085", r085);
    out.require(r1 >= r085, "alpha = 1 decays no slower than alpha = 0.85");
    Ok(())
}

fn inflow(out: &mut Outcome) -> Result<(), String> {
    let ball = Domain::ball(1.0);
    let zero = |_: f64, _: &Vec3, _: &Vec3| 0.0;
    let f0 = |x: &Vec3, v: &Vec3| (1.0 + x.x - 0.5 * x.y * x.z) * (1.0 + 0.2 * v.y);
    let (x, v, t) = (Vec3::new(0.1, -0.2, 0.05), Vec3::new(0.4, 0.3, -0.2), 1.2);
    let free = f0(&(x - v * t), &v);
    let eval = |alpha: f64, p: &InflowProblem<'_>, t: f64, x: &Vec3, v: &Vec3| {
        solve_transport_inflow(&ball, alpha, p, t, x, v).map_err(|e| e.to_string())
    };

    let c = 0.7;
    let q1 = |_: f64, _: &Vec3, _: &Vec3| c;
    let attenuation = eval(0.5, &InflowProblem { q1: &q1, q2: &zero, f0: &f0, g: &zero }, t, &x, &v)?;
    let e1 = out.record("attenuation_error", (attenuation - (-c * t).exp() * free).abs());

    let s = 0.4;
    let q2 = |_: f64, _: &Vec3, _: &Vec3| s;
    let source = eval(0.5, &InflowProblem { q1: &zero, q2: &q2, f0: &f0, g: &zero }, t, &x, &v)?;
    let e2 = out.record("source_error", (source - (free + s * t)).abs());

    let plain = InflowProblem { q1: &zero, q2: &zero, f0: &f0, g: &zero };
    let before = eval(1.0, &plain, t, &x, &v)?;
    let after = eval(1.0, &plain, 3.0, &x, &v)?;
    let e3 = out.record("weight_algebra_error", (before - free).abs().max(after.abs()));
    out.require(e1.max(e2).max(e3) <= 1e-10, "analytic examples within 1e-10");

    let q1 = |s: f64, y: &Vec3, _: &Vec3| 0.5 + 0.3 * y.x + 0.1 * s;
    let q2 = |s: f64, y: &Vec3, w: &Vec3| (y.y + w.z).sin() + s;
    let g = |s: f64, y: &Vec3, _: &Vec3| 0.3 * (s + y.z).cos();
    let problem = InflowProblem { q1: &q1, q2: &q2, f0: &f0, g: &g };
    let (x, v, t) = (Vec3::new(0.0, 0.3, 0.0), Vec3::new(1.0, 0.0, 0.0), 4.0);
    let rebounds = trace_backward(&ball, t, &x, &v, 100).map_err(|e| e.to_string())?.rebounds();
    out.record("oracle_rebounds", rebounds as f64);
    out.require(rebounds == 2, "oracle case has two rebounds");
    let closed = eval(0.3, &problem, t, &x, &v)?;
    let oracle = transport_inflow_rk4(&ball, 0.3, &problem, t, &x, &v, 2000).map_err(|e| e.to_string())?;
    let rel = out.record("oracle_rel_error", (closed - oracle).abs() / oracle.abs());
    out.require(rel <= 0.01, "closed form within 1% of the fine-step oracle");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_by_slug_and_id() {
        assert_eq!(select(Some("constants")).unwrap().iter().map(|c| c.id).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(select(Some("7, inflow")).unwrap().iter().map(|c| c.id).collect::<Vec<_>>(), vec![7, 13]);
        assert_eq!(select(None).unwrap().len(), 13);
        assert!(matches!(select(Some("nothing-here")), Err(HarnessError::Config(_))));
    }

    #[test]
    fn constants_suite_is_fast_and_passes() {
        let start = Instant::now();
        let report = run_verify(Some("constants")).unwrap();
        assert!(report.passed, "{:?}", report.criteria.iter().map(CriterionReport::line).collect::<Vec<_>>());
        assert!(start.elapsed().as_secs_f64() < 5.0);
    }
}
