//! The perturbative `f1 / f2` scheme and the positivity-preserving gain/loss scheme.
//!
//! Every scheme advances with exponential Euler steps composed with the transport propagator:
//! `u(t + dt) = T[e^{-r dt} u + phi(r) S]` with `phi(r) = (1 - e^{-r dt}) / r` and the source
//! `S` frozen at the step start. The linear `f2` part attenuates with `nu`. The `f1` part
//! attenuates with the full loss rate `q(mu + f)` and carries the resulting `O(f^2)`
//! weight corrections in its source, so that `mu + f1 + f2` obeys exactly the update the
//! positivity scheme marches. Mass is restored after each step by rescaling `F = mu + f`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{CollisionOps, Propagator, SolverConfig, SolverError};
use crate::collision::CollisionModel;
use crate::gas_state::{DistributionField, SpatialMesh, VelocityGrid, Weight};
use crate::geometry::Domain;
use crate::linear_ops::MollifierSpec;
use crate::Vec3;

/// Fields at the times `n dt`, `n = 0..=steps`, stored as value matrices (nodes x cells).
#[derive(Clone, Debug)]
pub struct FieldSeries {
    dt: f64,
    frames: Vec<DMatrix<f64>>,
    grid: Arc<VelocityGrid>,
    mesh: Arc<SpatialMesh>,
}

impl FieldSeries {
    pub fn zeros(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>, dt: f64, steps: usize) -> Self {
        let frames = vec![DMatrix::zeros(grid.len(), mesh.len()); steps + 1];
        Self { dt, frames, grid, mesh }
    }

    /// The same field at every time.
    pub fn constant(f: &DistributionField, dt: f64, steps: usize) -> Self {
        Self { dt, frames: vec![f.values().clone(); steps + 1], grid: f.grid().clone(), mesh: f.mesh().clone() }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps (one less than the number of frames).
    pub fn steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn values(&self, n: usize) -> &DMatrix<f64> {
        &self.frames[n]
    }

    pub fn frame(&self, n: usize) -> DistributionField {
        DistributionField::from_values(self.grid.clone(), self.mesh.clone(), self.frames[n].clone()).expect("frame shape matches")
    }

    /// Frame nearest to time `t`.
    pub fn at_time(&self, t: f64) -> DistributionField {
        self.frame(((t / self.dt).round() as usize).min(self.steps()))
    }

    pub fn norms(&self, weight: &Weight) -> Vec<(f64, f64)> {
        (0..self.frames.len()).map(|n| (self.time(n), self.frame(n).weighted_sup_norm(weight))).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.frames.len()).map(|n| self.frame(n).total_mass()).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.frames.iter().map(|f| f.min()).fold(f64::INFINITY, f64::min)
    }

    /// `max_n || self_n - other_n ||_{L^inf(m)}`.
    pub fn max_distance(&self, other: &FieldSeries, weight: &Weight) -> f64 {
        let m: Vec<f64> = self.grid.nodes().iter().map(|v| weight.value(v.norm())).collect();
        self.frames.iter().zip(&other.frames).map(|(a, b)| sup_weighted(&(a - b), &m)).fold(0.0, f64::max)
    }

    /// The same series with `shift` added to every frame.
    pub fn shifted(&self, shift: &DMatrix<f64>) -> Self {
        self.map(|f| f + shift)
    }

    fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> Self {
        Self { frames: self.frames.iter().map(f).collect(), ..self.clone() }
    }
}

impl std::ops::Add for &FieldSeries {
    type Output = FieldSeries;

    fn add(self, rhs: &FieldSeries) -> FieldSeries {
        FieldSeries { frames: self.frames.iter().zip(&rhs.frames).map(|(a, b)| a + b).collect(), ..self.clone() }
    }
}

fn sup_weighted(d: &DMatrix<f64>, m: &[f64]) -> f64 {
    d.column_iter().flat_map(|col| col.iter().zip(m).map(|(x, w)| x.abs() * w).collect::<Vec<_>>()).fold(0.0, f64::max)
}

/// Output of [`Solver::solve_f1`].
#[derive(Clone, Debug)]
pub struct F1Solution {
    pub series: FieldSeries,
    /// `max_t || h_{l+1} - h_l ||` per iteration.
    pub residuals: Vec<f64>,
}

/// Output of [`Solver::solve_perturbed`].
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub f1: FieldSeries,
    pub f2: FieldSeries,
    /// Pair residual per outer iteration.
    pub residuals: Vec<f64>,
    /// Largest per-step mass rescaling `|s - 1|` applied to `F`.
    pub max_mass_rescale: f64,
}

impl SolutionPair {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    /// `f = f1 + f2`.
    pub fn perturbation(&self) -> FieldSeries {
        &self.f1 + &self.f2
    }

    /// `F = mu + f1 + f2`.
    pub fn full(&self) -> FieldSeries {
        let mu = maxwellian_matrix(&self.f1.grid, self.f1.mesh.len());
        self.perturbation().map(|f| f + &mu)
    }
}

/// Output of [`Solver::solve_positivity_scheme`].
#[derive(Clone, Debug)]
pub struct PositivityRun {
    pub series: FieldSeries,
    pub min_value: f64,
    pub max_mass_rescale: f64,
}

/// Summary numbers of a solver run, as written by the `simulate` command.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub relative_mass_drift_per_time: f64,
    pub max_mass_rescale: f64,
    pub lambda_hat: f64,
    pub fit_quality: f64,
    pub min_value: f64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

fn maxwellian_matrix(grid: &VelocityGrid, cells: usize) -> DMatrix<f64> {
    DMatrix::from_fn(grid.len(), cells, |k, _| grid.maxwellian()[k])
}

/// The fixed spatial-velocity bump `psi(x) = (1 - |x|^2)_+^2` used by the standard data.
pub fn bump_profile(x: &Vec3) -> f64 {
    (1.0 - x.norm_squared()).max(0.0).powi(2)
}

/// Standard small perturbation `amplitude psi(x) v_x mu(v)`: zero mass, odd in `v_x`.
pub fn standard_bump(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>, amplitude: f64) -> DistributionField {
    DistributionField::from_fn(grid, mesh, |x, v| amplitude * bump_profile(x) * v.x * crate::gas_state::maxwellian(v))
}

/// Everything a run needs on one discretization: propagator, collision matrices, config.
#[derive(Clone, Debug)]
pub struct Solver {
    config: SolverConfig,
    propagator: Propagator,
    ops: CollisionOps,
    mu: DMatrix<f64>,
    total_mu: f64,
    steps: usize,
}

impl Solver {
    pub fn new(
        config: SolverConfig,
        model: &CollisionModel,
        domain: &Domain,
        grid: Arc<VelocityGrid>,
        mesh: Arc<SpatialMesh>,
        alpha: f64,
    ) -> Result<Self, SolverError> {
        let steps = config.validate()?;
        let mollifier = MollifierSpec::new(config.delta).map_err(|e| SolverError::BadConfig(e.to_string()))?;
        let propagator = Propagator::new(domain, grid.clone(), mesh.clone(), config.dt, alpha)?;
        let ops = CollisionOps::new(model, grid.clone(), &mollifier);
        let mu = maxwellian_matrix(&grid, mesh.len());
        let total_mu = DistributionField::maxwellian(grid, mesh).total_mass();
        Ok(Self { config, propagator, ops, mu, total_mu, steps })
    }

    /// Same discretization with another configuration of the time loop (the matrices are reused).
    pub fn with_horizon(&self, horizon: f64) -> Result<Self, SolverError> {
        let config = SolverConfig { horizon, ..self.config.clone() };
        let steps = config.validate()?;
        Ok(Self { config, steps, ..self.clone() })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn ops(&self) -> &CollisionOps {
        &self.ops
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grid(&self) -> &Arc<VelocityGrid> {
        self.propagator.grid()
    }

    pub fn mesh(&self) -> &Arc<SpatialMesh> {
        self.propagator.mesh()
    }

    pub fn zeros(&self) -> FieldSeries {
        FieldSeries::zeros(self.grid().clone(), self.mesh().clone(), self.config.dt, self.steps)
    }

    fn norm(&self, f: &DMatrix<f64>) -> f64 {
        let m: Vec<f64> = self.grid().nodes().iter().map(|v| self.config.weight.value(v.norm())).collect();
        sup_weighted(f, &m)
    }

    fn check_small(&self, what: &'static str, norm: f64) -> Result<(), SolverError> {
        if norm > self.config.eta {
            return Err(SolverError::SmallnessViolated { what, norm, eta: self.config.eta });
        }
        Ok(())
    }

    /// Elementwise `(e^{-r dt}, phi(r))`.
    fn weights(&self, rate: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let dt = self.config.dt;
        let e = rate.map(|r| (-r * dt).exp());
        let phi = rate.map(|r| if (r * dt).abs() < 1e-8 { dt * (1.0 - 0.5 * r * dt) } else { -(-r * dt).exp_m1() / r });
        (e, phi)
    }

    fn nu_matrix(&self) -> DMatrix<f64> {
        let nu: &DVector<f64> = self.ops.nu();
        DMatrix::from_fn(self.grid().len(), self.mesh().len(), |k, _| nu[k])
    }

    /// Rescale `mu + f` to the equilibrium mass plus `target`; returns the correction added to
    /// `f` and `|s - 1|`.
    fn mass_fix(&self, f: &DMatrix<f64>, target: f64) -> (DMatrix<f64>, f64) {
        let field = |v: &DMatrix<f64>| {
            DistributionField::from_values(self.grid().clone(), self.mesh().clone(), v.clone()).expect("shape")
        };
        let full = f + &self.mu;
        let s = (self.total_mu + target) / field(&full).total_mass();
        (full * (s - 1.0), (s - 1.0).abs())
    }

    /// One Picard sweep of the `f1` equation against `g` with the quadratic terms evaluated
    /// on `previous`.
    fn f1_sweep(&self, f0: &DMatrix<f64>, g: &FieldSeries, previous: &FieldSeries, quadratic: bool) -> FieldSeries {
        let (e_nu, phi_nu) = self.weights(&self.nu_matrix());
        let mut out = self.zeros();
        out.frames[0] = f0.clone();
        for n in 0..self.steps {
            let h = &out.frames[n];
            let pre = if quadratic {
                let f_prev = &previous.frames[n] + &g.frames[n];
                let rate = self.nu_matrix() + self.ops.loss_rate(&f_prev);
                let (e, phi) = self.weights(&rate);
                let coupling = self.ops.a() * h + self.ops.k() * &g.frames[n];
                e.component_mul(h)
                    + phi.component_mul(&(self.ops.b2() * h + self.ops.gain(&f_prev)))
                    + (&phi - &phi_nu).component_mul(&coupling)
                    + (&e - &e_nu).component_mul(&g.frames[n])
            } else {
                e_nu.component_mul(h) + phi_nu.component_mul(&(self.ops.b2() * h))
            };
            out.frames[n + 1] = self.propagator.apply(&pre);
        }
        out
    }

    /// `f2` march against `g`; returns the series and the largest mass rescale.
    fn f2_march(&self, g: &FieldSeries) -> (FieldSeries, f64) {
        let (e, phi) = self.weights(&self.nu_matrix());
        let target = DistributionField::from_values(self.grid().clone(), self.mesh().clone(), g.frames[0].clone())
            .expect("shape")
            .total_mass();
        let mut out = self.zeros();
        let mut rescale: f64 = 0.0;
        for n in 0..self.steps {
            let f2 = &out.frames[n];
            let pre = e.component_mul(f2) + phi.component_mul(&(self.ops.k() * f2 + self.ops.a() * &g.frames[n]));
            let next = self.propagator.apply(&pre);
            let (fix, s) = self.mass_fix(&(&next + &g.frames[n + 1]), target);
            rescale = rescale.max(s);
            out.frames[n + 1] = next + fix;
        }
        (out, rescale)
    }

    /// `h_{l+1} = S f0 + int S [B2 h_{l+1} + Q(h_l + g, h_l + g)]` from `h_0 = 0` until successive
    /// iterates differ by less than `fp_tol`.
    pub fn solve_f1(&self, f0: &DistributionField, g: &FieldSeries) -> Result<F1Solution, SolverError> {
        self.check_small("f0", f0.weighted_sup_norm(&self.config.weight))?;
        self.check_small("g", (0..=g.steps()).map(|n| self.norm(&g.frames[n])).fold(0.0, f64::max))?;
        let mut h = self.zeros();
        let mut residuals = Vec::new();
        for _ in 0..self.config.max_outer_iter {
            let next = self.f1_sweep(f0.values(), g, &h, true);
            let r = next.max_distance(&h, &self.config.weight);
            residuals.push(r);
            h = next;
            if r < self.config.fp_tol {
                return Ok(F1Solution { series: h, residuals });
            }
        }
        Err(SolverError::NoConvergence(self.config.max_outer_iter))
    }

    /// The `f1` equation without the quadratic term: `dh/dt = G_nu h + B2 h`.
    pub fn solve_f1_linear(&self, f0: &DistributionField) -> FieldSeries {
        let zero = self.zeros();
        self.f1_sweep(f0.values(), &zero, &zero, false)
    }

    /// `df2/dt = G f2 + A g`, `f2(0) = 0`, keeping `Pi_G(f2 + g)` at its initial value.
    pub fn solve_f2(&self, g: &FieldSeries) -> FieldSeries {
        self.f2_march(g).0
    }

    /// The coupled `f1 / f2` iteration from `f1(0) = f0`, `f2(0) = 0`. Each outer iteration does
    /// one `f1` sweep against the previous `f2` and then re-solves `f2`.
    pub fn solve_perturbed(&self, f0: &DistributionField) -> Result<SolutionPair, SolverError> {
        self.check_small("f0", f0.weighted_sup_norm(&self.config.weight))?;
        let mass = f0.total_mass();
        let scale = self.total_mu * 1e-12;
        if mass.abs() > scale {
            return Err(SolverError::NonzeroMass(mass));
        }
        let mut f1 = self.zeros();
        let mut f2 = self.zeros();
        let mut residuals = Vec::new();
        for _ in 0..self.config.max_outer_iter {
            let f1_next = self.f1_sweep(f0.values(), &f2, &f1, true);
            let (f2_next, s) = self.f2_march(&f1_next);
            let r = f1_next.max_distance(&f1, &self.config.weight).max(f2_next.max_distance(&f2, &self.config.weight));
            residuals.push(r);
            f1 = f1_next;
            f2 = f2_next;
            if r < self.config.fp_tol {
                return Ok(SolutionPair { f1, f2, residuals, max_mass_rescale: s });
            }
        }
        Err(SolverError::NoConvergence(self.config.max_outer_iter))
    }

    /// Gain/loss scheme `dF/dt + v . grad F = -q(F) F + Q+(F, F)` started from `F0 >= 0`.
    ///
    /// The iteration `F^(n) -> F^(n+1)` of the Duhamel form freezes `q` and `Q+` at the step
    /// start, which makes it lower-triangular in time: its fixed point is the forward march
    /// performed here. Every factor is nonnegative, and no value is ever clamped.
    pub fn solve_positivity_scheme(&self, big_f0: &DistributionField) -> Result<PositivityRun, SolverError> {
        let min0 = big_f0.min_value();
        if min0 < 0.0 {
            return Err(SolverError::NegativeValueDetected { time: 0.0, value: min0 });
        }
        let target = big_f0.total_mass() - self.total_mu;
        let mut out = self.zeros();
        out.frames[0] = big_f0.values().clone();
        let mut rescale: f64 = 0.0;
        for n in 0..self.steps {
            let f = &out.frames[n];
            let (e, phi) = self.weights(&self.ops.loss_rate(f));
            let next = self.propagator.apply(&(e.component_mul(f) + phi.component_mul(&self.ops.gain(f))));
            let (fix, s) = self.mass_fix(&(&next - &self.mu), target);
            rescale = rescale.max(s);
            let next = next + fix;
            let min = next.min();
            if min < 0.0 {
                return Err(SolverError::NegativeValueDetected { time: out.time(n + 1), value: min });
            }
            out.frames[n + 1] = next;
        }
        let min_value = out.min_value();
        Ok(PositivityRun { series: out, min_value, max_mass_rescale: rescale })
    }

    /// `|| f - f~ ||(T0) / || f - f~ ||(0)` for runs from `f0` and `f0 + scale p` over the window
    /// `[0, T0]`, with a fixed zero-mass direction `p` normalized in `L^inf(m)`.
    pub fn uniqueness_contraction_diagnostic(&self, f0: &DistributionField, scale: f64, window: f64) -> Result<f64, SolverError> {
        if scale == 0.0 {
            return Ok(0.0);
        }
        let short = self.with_horizon(window)?;
        let p = DistributionField::from_fn(self.grid().clone(), self.mesh().clone(), |x, v| {
            bump_profile(x) * v.y * crate::gas_state::maxwellian(v)
        });
        let p_norm = p.weighted_sup_norm(&self.config.weight);
        let shifted = f0.with_values(f0.values() + p.values() * (scale / p_norm));
        let a = short.solve_perturbed(f0)?.perturbation();
        let b = short.solve_perturbed(&shifted)?.perturbation();
        let n = a.steps();
        let start = self.norm(&(a.values(0) - b.values(0)));
        if start == 0.0 {
            return Ok(0.0);
        }
        Ok(self.norm(&(a.values(n) - b.values(n))) / start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::{GridSpec, MeshSpec};

    fn solver(horizon: f64, dt: f64) -> Solver {
        let d = Domain::ball(1.0);
        let model = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(4, 4)).unwrap();
        let grid = Arc::new(VelocityGrid::new(GridSpec { v_max: 3.6, n_per_axis: 6 }).unwrap());
        let mesh = Arc::new(SpatialMesh::new(&d, MeshSpec { n_per_axis: 3, subsamples: 3 }).unwrap());
        let config = SolverConfig { dt, horizon, ..SolverConfig::test_resolution() };
        Solver::new(config, &model, &d, grid, mesh, 0.9).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_after_one_iteration() {
        let s = solver(0.3, 0.05);
        let zero = DistributionField::zeros(s.grid().clone(), s.mesh().clone());
        let out = s.solve_f1(&zero, &s.zeros()).unwrap();
        assert_eq!(out.residuals.len(), 1);
        assert_eq!(out.series.values(s.steps()).abs().max(), 0.0);
        assert_eq!(s.solve_f2(&s.zeros()).values(s.steps()).abs().max(), 0.0);
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_both_schemes() {
        let s = solver(0.5, 0.05);
        let mu = DistributionField::maxwellian(s.grid().clone(), s.mesh().clone());
        let run = s.solve_positivity_scheme(&mu).unwrap();
        let drift = (run.series.values(s.steps()) - mu.values()).abs().max();
        assert!(drift < 1e-14, "{drift}");
        let zero = DistributionField::zeros(s.grid().clone(), s.mesh().clone());
        let pair = s.solve_perturbed(&zero).unwrap();
        assert_eq!(pair.perturbation().values(s.steps()).abs().max(), 0.0);
    }

    #[test]
    fn f2_keeps_the_pair_mass_constant() {
        let s = solver(0.5, 0.05);
        let g0 = DistributionField::from_fn(s.grid().clone(), s.mesh().clone(), |x, v| {
            0.01 * bump_profile(x) * crate::gas_state::maxwellian(v)
        });
        let g = FieldSeries::constant(&g0, s.config().dt, s.steps());
        let f2 = s.solve_f2(&g);
        let masses = (&f2 + &g).masses();
        for m in &masses {
            assert!((m - masses[0]).abs() < 1e-14, "{m} vs {}", masses[0]);
        }
    }

    #[test]
    fn schemes_agree_on_the_standard_bump() {
        let s = solver(0.5, 0.05);
        let f0 = standard_bump(s.grid().clone(), s.mesh().clone(), 0.05);
        let pair = s.solve_perturbed(&f0).unwrap();
        let mu = DistributionField::maxwellian(s.grid().clone(), s.mesh().clone());
        let run = s.solve_positivity_scheme(&mu.with_values(mu.values() + f0.values())).unwrap();
        let gap = pair.full().max_distance(&run.series, &s.config().weight);
        assert!(gap < 5.0 * s.config().fp_tol, "{gap}");
        assert!(run.min_value > 0.0);
    }

    /// The same solver with transport switched off.
    fn homogeneous(dt: f64, horizon: f64) -> Solver {
        let s = solver(horizon, dt);
        let propagator = Propagator::identity(s.grid().clone(), s.mesh().clone(), dt);
        Solver { propagator, ..s }
    }

    fn uniform(s: &Solver, f: impl Fn(&Vec3) -> f64) -> DistributionField {
        DistributionField::from_fn(s.grid().clone(), s.mesh().clone(), |_, v| f(v))
    }

    #[test]
    fn identity_propagator_is_the_identity() {
        let s = homogeneous(0.05, 0.1);
        let f = DistributionField::from_fn(s.grid().clone(), s.mesh().clone(), |x, v| {
            (1.0 + x.x) * v.y * crate::gas_state::maxwellian(v)
        });
        assert!((s.propagator().apply(f.values()) - f.values()).abs().max() < 1e-15);
    }

    #[test]
    fn linear_f1_matches_fine_rk4_on_a_homogeneous_problem() {
        // The collision part is stiff (nu dt ~ 0.2 at dt = 0.01 with a comparable B2), so the
        // first-order error constant is large: 1% needs dt below about 2e-4.
        let s = homogeneous(2e-4, 0.2);
        let h0 = uniform(&s, |v| crate::gas_state::maxwellian(v) * (1.0 + 0.3 * v.x + 0.2 * (v.norm_squared() - 3.0)));
        let series = s.solve_f1_linear(&h0);
        let ops = s.ops();
        let rhs = |h: &DVector<f64>| ops.b2() * h - h.component_mul(ops.nu());
        let mut h = DVector::from_column_slice(h0.cell(0));
        let fine = 1e-3;
        for _ in 0..200 {
            let k1 = rhs(&h);
            let k2 = rhs(&(&h + &k1 * (0.5 * fine)));
            let k3 = rhs(&(&h + &k2 * (0.5 * fine)));
            let k4 = rhs(&(&h + &k3 * fine));
            h += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (fine / 6.0);
        }
        let out = series.values(series.steps());
        let mut probes: Vec<usize> = (0..s.grid().len()).collect();
        probes.sort_by(|a, b| h[*b].abs().total_cmp(&h[*a].abs()));
        for &k in probes.iter().step_by(3).take(5) {
            let rel = (out[(k, 0)] - h[k]).abs() / h[k].abs();
            assert!(rel < 0.01, "node {k}: {} vs {} ({rel})", out[(k, 0)], h[k]);
        }
    }

    #[test]
    fn f2_is_first_order_under_step_halving() {
        let horizon = 0.2;
        let g0 = |s: &Solver| uniform(s, |v| 0.01 * crate::gas_state::maxwellian(v) * (v.x + 0.5 * v.y * v.z));
        let end: Vec<DMatrix<f64>> = [0.005, 0.0025, 0.00125]
            .iter()
            .map(|&dt| {
                let s = homogeneous(dt, horizon);
                let g = FieldSeries::constant(&g0(&s), dt, s.steps());
                s.solve_f2(&g).values(s.steps()).clone()
            })
            .collect();
        let ratio = (&end[0] - &end[1]).abs().max() / (&end[1] - &end[2]).abs().max();
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn f1_decays_over_two_time_units() {
        let s = solver(2.0, 0.05);
        let f0 = standard_bump(s.grid().clone(), s.mesh().clone(), 0.05);
        let out = s.solve_f1(&f0, &s.zeros()).unwrap();
        let w = &s.config().weight;
        let start = f0.weighted_sup_norm(w);
        let end = out.series.at_time(2.0).weighted_sup_norm(w);
        assert!(end < start, "{end} vs {start}");
    }

    #[test]
    fn contraction_diagnostic_contracts_at_the_default_budget() {
        let s = solver(0.5, 0.05);
        let unit = standard_bump(s.grid().clone(), s.mesh().clone(), 1.0);
        let eta = s.config().eta;
        let f0 = unit.with_values(unit.values() * (0.9 * eta / unit.weighted_sup_norm(&s.config().weight)));
        assert_eq!(s.uniqueness_contraction_diagnostic(&f0, 0.0, 0.5).unwrap(), 0.0);
        let factor = s.uniqueness_contraction_diagnostic(&f0, 1e-3 * eta, 0.5).unwrap();
        assert!(factor > 0.0 && factor < 0.9, "{factor}");
    }

    #[test]
    fn nonzero_mass_is_rejected() {
        let s = solver(0.2, 0.05);
        let f0 = DistributionField::from_fn(s.grid().clone(), s.mesh().clone(), |_, v| 1e-3 * crate::gas_state::maxwellian(v));
        assert!(matches!(s.solve_perturbed(&f0), Err(SolverError::NonzeroMass(_))));
    }
}
