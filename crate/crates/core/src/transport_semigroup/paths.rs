//! Branching backward paths and the Monte Carlo semigroup estimator.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sampling::{path_rng, sample_diffuse_velocity};
use super::{PhaseFunction, TransportError, GRAZING_BUDGET};
use crate::characteristics::{reflect_specular, DEFAULT_REBOUND_CAP};
use crate::collision::{CollisionModel, FrequencyTable};
use crate::gas_state::{maxwellian, DistributionField, Weight};
use crate::geometry::{Domain, GRAZING_TOL};
use crate::Vec3;

/// Damped wall law: the diffuse factor `alpha` becomes `Delta_n = alpha (1 - 1/n)`, so a
/// fraction `alpha / n` of the wall mass is absorbed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampedBoundary {
    pub n: u32,
}

impl DampedBoundary {
    pub fn delta_n(&self, alpha: f64) -> f64 {
        alpha * (1.0 - 1.0 / f64::from(self.n))
    }
}

/// Which of `p` rebounds are specular: a strictly increasing list drawn from `1..=p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionPattern {
    pub p: usize,
    pub specular: Vec<usize>,
}

impl ReflectionPattern {
    /// All patterns with `i` specular rebounds among `p`.
    pub fn all(p: usize, i: usize) -> Vec<Self> {
        fn extend(p: usize, i: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<ReflectionPattern>) {
            if cur.len() == i {
                out.push(ReflectionPattern { p, specular: cur.clone() });
                return;
            }
            for k in start..=p {
                cur.push(k);
                extend(p, i, k + 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if i <= p {
            extend(p, i, 1, &mut Vec::with_capacity(i), &mut out);
        }
        out
    }

    /// `(1 - alpha)^i d^(p - i)` with `d` the diffuse factor (`alpha`, or `Delta_n` when damped).
    pub fn weight(&self, alpha: f64, diffuse: f64) -> f64 {
        let i = self.specular.len();
        (1.0 - alpha).powi(i as i32) * diffuse.powi((self.p - i) as i32)
    }

    pub fn is_specular(&self, rebound: usize) -> bool {
        self.specular.binary_search(&rebound).is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathEnd {
    /// Reached the initial time.
    Reached,
    /// Removed by the damped wall.
    Absorbed,
    /// Needed more rebounds than allowed.
    Truncated,
    Grazing,
    CapExceeded,
}

#[derive(Clone, Copy, Debug)]
pub struct PathOutcome {
    /// `exp(-int nu) (f0 / mu)(terminal)` for reached paths, else `0`.
    pub value: f64,
    /// Accumulated `exp(-int nu)` up to where the path stopped.
    pub attenuation: f64,
    pub rebounds: usize,
    pub diffuse_events: usize,
    pub end: PathEnd,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PointEstimate {
    pub value: f64,
    pub stderr: f64,
    pub paths: usize,
    pub grazing_resampled: usize,
    pub mean_rebounds: f64,
    /// Mean attenuation carried by truncated paths, times `mu(v)`.
    pub remaining_mass: f64,
    pub absorbed_fraction: f64,
    /// No wall within the horizon: the value is exact.
    pub deterministic: bool,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct SemigroupStats {
    pub outputs: usize,
    pub paths: usize,
    pub grazing_resampled: usize,
    pub max_stderr: f64,
}

/// Backward path generator for one domain, collision model and wall law.
#[derive(Clone, Debug)]
pub struct PathSampler<'a> {
    domain: &'a Domain,
    nu: FrequencyTable,
    alpha: f64,
    diffuse: f64,
    seed: u64,
    rebound_cap: usize,
}

impl<'a> PathSampler<'a> {
    pub fn new(domain: &'a Domain, model: &CollisionModel, alpha: f64) -> Result<Self, TransportError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(TransportError::BadAlpha(alpha));
        }
        Ok(Self { domain, nu: FrequencyTable::standard(model), alpha, diffuse: alpha, seed: 0, rebound_cap: DEFAULT_REBOUND_CAP })
    }

    pub fn with_damping(mut self, damping: DampedBoundary) -> Self {
        self.diffuse = damping.delta_n(self.alpha);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rebound_cap(mut self, cap: usize) -> Self {
        self.rebound_cap = cap;
        self
    }

    pub fn domain(&self) -> &Domain {
        self.domain
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Diffuse factor: `alpha`, or `Delta_n` for a damped wall.
    pub fn diffuse_factor(&self) -> f64 {
        self.diffuse
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frequency(&self, speed: f64) -> f64 {
        self.nu.eval(speed)
    }

    /// Follow one backward path over time `t`, stopping after `max_rebounds` rebounds.
    pub fn run_path<F: PhaseFunction + ?Sized, R: Rng + ?Sized>(
        &self,
        t: f64,
        x: &Vec3,
        v: &Vec3,
        f0: &F,
        rng: &mut R,
        max_rebounds: usize,
    ) -> Result<PathOutcome, TransportError> {
        let (mut pos, mut vel, mut remaining) = (*x, *v, t);
        let mut out = PathOutcome { value: 0.0, attenuation: 1.0, rebounds: 0, diffuse_events: 0, end: PathEnd::Reached };
        loop {
            let nu = self.nu.eval(vel.norm());
            let Some(hit) = self.domain.flight(&pos, &vel, remaining)? else {
                out.attenuation *= (-nu * remaining).exp();
                out.value = out.attenuation * f0.ratio(&(pos - vel * remaining), &vel);
                return Ok(out);
            };
            out.attenuation *= (-nu * hit.time).exp();
            remaining -= hit.time;
            pos = hit.footprint;
            let end = if out.rebounds >= max_rebounds {
                Some(PathEnd::Truncated)
            } else if out.rebounds >= self.rebound_cap {
                Some(PathEnd::CapExceeded)
            } else {
                None
            };
            if let Some(end) = end {
                out.end = end;
                return Ok(out);
            }
            let n = self.domain.normal_unchecked(&pos)?;
            if n.dot(&vel).abs() <= GRAZING_TOL * vel.norm() {
                out.end = PathEnd::Grazing;
                return Ok(out);
            }
            out.rebounds += 1;
            let u: f64 = rng.random();
            if u < 1.0 - self.alpha {
                vel = reflect_specular(&n, &vel).expect("unit normal");
            } else if u < 1.0 - self.alpha + self.diffuse {
                vel = sample_diffuse_velocity(&n, rng);
                out.diffuse_events += 1;
            } else {
                out.end = PathEnd::Absorbed;
                return Ok(out);
            }
        }
    }

    /// Monte Carlo value of `S(t) f0` at `(x, v)` from `paths` accepted paths, truncated after
    /// `max_rebounds` rebounds when given. `output` selects the random stream.
    #[allow(clippy::too_many_arguments)]
    pub fn estimate<F: PhaseFunction + ?Sized>(
        &self,
        t: f64,
        x: &Vec3,
        v: &Vec3,
        f0: &F,
        paths: usize,
        output: u64,
        max_rebounds: Option<usize>,
    ) -> Result<PointEstimate, TransportError> {
        let mu = maxwellian(v);
        if t <= 0.0 {
            return Ok(PointEstimate { value: f0.value(x, v), paths, deterministic: true, ..Default::default() });
        }
        if self.domain.flight(x, v, t)?.is_none() {
            let value = (-self.nu.eval(v.norm()) * t).exp() * f0.value(&(x - v * t), v);
            return Ok(PointEstimate { value, paths, deterministic: true, ..Default::default() });
        }
        let limit = max_rebounds.unwrap_or(usize::MAX);
        let budget = (GRAZING_BUDGET * paths as f64).floor() as usize;
        let (mut sum, mut sum_sq, mut rebounds, mut remaining, mut absorbed) = (0.0, 0.0, 0usize, 0.0, 0usize);
        let (mut accepted, mut grazing, mut index) = (0usize, 0usize, 0u64);
        while accepted < paths {
            let mut rng = path_rng(self.seed, output, index);
            index += 1;
            let path = self.run_path(t, x, v, f0, &mut rng, limit)?;
            match path.end {
                PathEnd::Grazing | PathEnd::CapExceeded => {
                    grazing += 1;
                    if grazing > budget {
                        return Err(TransportError::GrazingBudgetExceeded { grazing, paths });
                    }
                    continue;
                }
                PathEnd::Truncated => remaining += path.attenuation,
                PathEnd::Absorbed => absorbed += 1,
                PathEnd::Reached => {}
            }
            accepted += 1;
            sum += path.value;
            sum_sq += path.value * path.value;
            rebounds += path.rebounds;
        }
        let n = paths as f64;
        let mean = sum / n;
        let var = if paths > 1 { (sum_sq - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
        Ok(PointEstimate {
            value: mu * mean,
            stderr: mu * (var / n).sqrt(),
            paths,
            grazing_resampled: grazing,
            mean_rebounds: rebounds as f64 / n,
            remaining_mass: mu * remaining / n,
            absorbed_fraction: absorbed as f64 / n,
            deterministic: false,
        })
    }
}

/// `S(t) f0` on every (cell, node) of the field, from `paths` paths per output.
pub fn apply_semigroup(
    sampler: &PathSampler<'_>,
    gamma: f64,
    weight: &Weight,
    t: f64,
    f0: &DistributionField,
    paths: usize,
) -> Result<(DistributionField, SemigroupStats), TransportError> {
    if !weight.semigroup_admissible(gamma) {
        return Err(TransportError::AdmissibilityViolation(gamma));
    }
    let grid = f0.grid().clone();
    let mesh = f0.mesh().clone();
    if t <= 0.0 {
        return Ok((f0.clone(), SemigroupStats { outputs: grid.len() * mesh.len(), ..Default::default() }));
    }
    let n_v = grid.len();
    let estimates: Vec<PointEstimate> = (0..mesh.len() * n_v)
        .into_par_iter()
        .map(|o| {
            let (c, k) = (o / n_v, o % n_v);
            sampler.estimate(t, &mesh.cells()[c].point, grid.node(k), f0, paths, o as u64, None)
        })
        .collect::<Result<_, _>>()?;
    let mut out = DistributionField::zeros(grid, mesh);
    let mut stats = SemigroupStats { outputs: estimates.len(), paths, ..Default::default() };
    for (o, e) in estimates.iter().enumerate() {
        out.values_mut()[(o % n_v, o / n_v)] = e.value;
        stats.grazing_resampled += e.grazing_resampled;
        stats.max_stderr = stats.max_stderr.max(e.stderr);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::trace_backward;

    fn bump(x: &Vec3, v: &Vec3) -> f64 {
        let r2 = x.norm_squared() / 0.36;
        let spatial = if r2 < 1.0 { (1.0 - r2).powi(3) } else { 0.0 };
        spatial * maxwellian(v) * (1.0 + 0.3 * v.x)
    }

    #[test]
    fn pattern_counts_and_weights_partition_unity() {
        assert_eq!(ReflectionPattern::all(3, 0).len(), 1);
        assert_eq!(ReflectionPattern::all(3, 1).len(), 3);
        assert_eq!(
            ReflectionPattern::all(3, 2),
            vec![
                ReflectionPattern { p: 3, specular: vec![1, 2] },
                ReflectionPattern { p: 3, specular: vec![1, 3] },
                ReflectionPattern { p: 3, specular: vec![2, 3] },
            ]
        );
        let total: f64 = (0..=4).flat_map(|i| ReflectionPattern::all(4, i)).map(|l| l.weight(0.83, 0.83)).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let damped = DampedBoundary { n: 5 }.delta_n(0.9);
        let total: f64 = (0..=2).flat_map(|i| ReflectionPattern::all(2, i)).map(|l| l.weight(0.9, damped)).sum();
        assert!((total - (1.0 - 0.9 / 5.0f64).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn trivial_cases_are_exact() {
        let d = Domain::ball(1.0);
        let s = PathSampler::new(&d, &CollisionModel::hard_spheres(), 0.9).unwrap();
        let (x, v) = (Vec3::new(0.1, 0.2, 0.0), Vec3::new(0.5, -0.3, 0.2));
        let at0 = s.estimate(0.0, &x, &v, &bump, 10, 0, None).unwrap();
        assert_eq!(at0.value, bump(&x, &v));
        let zero = |_: &Vec3, _: &Vec3| 0.0;
        assert_eq!(s.estimate(3.0, &x, &v, &zero, 100, 0, None).unwrap().value, 0.0);
        let short = s.estimate(0.5, &x, &v, &bump, 10, 0, None).unwrap();
        let expect = (-s.frequency(v.norm()) * 0.5).exp() * bump(&(x - v * 0.5), &v);
        assert!(short.deterministic && short.stderr == 0.0);
        assert!((short.value - expect).abs() <= 1e-15 * expect.abs());
    }

    #[test]
    fn pure_specular_path_matches_characteristic() {
        let d = Domain::ball(1.0);
        let s = PathSampler::new(&d, &CollisionModel::hard_spheres(), 0.0).unwrap();
        let (x, v, t) = (Vec3::new(0.2, -0.1, 0.3), Vec3::new(1.1, 0.4, -0.7), 3.0);
        let mut rng = path_rng(0, 0, 0);
        let path = s.run_path(t, &x, &v, &bump, &mut rng, usize::MAX).unwrap();
        let traj = trace_backward(&d, t, &x, &v, 100).unwrap();
        let speed = v.norm();
        let expect = (-s.frequency(speed) * t).exp() * bump(&traj.terminal, &traj.terminal_velocity) / maxwellian(&v);
        assert_eq!(path.rebounds, traj.rebounds());
        assert!((path.value - expect).abs() < 1e-8 * expect.abs().max(1e-12));
    }

    #[test]
    fn damped_wall_absorbs_its_share() {
        let d = Domain::ball(1.0);
        let alpha = 0.8;
        let s = PathSampler::new(&d, &CollisionModel::hard_spheres(), alpha).unwrap().with_damping(DampedBoundary { n: 4 });
        let (x, v) = (Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0));
        let e = s.estimate(0.8, &x, &v, &bump, 20_000, 9, Some(1)).unwrap();
        // Exactly one rebound happens before the horizon, so the absorbed share is alpha / n.
        let se = (0.2 * 0.8 / 20_000f64).sqrt();
        assert!((e.absorbed_fraction - alpha / 4.0).abs() < 4.0 * se, "{}", e.absorbed_fraction);
    }

    #[test]
    fn field_semigroup_requires_admissible_weight() {
        use crate::gas_state::{GridSpec, MeshSpec, SpatialMesh, VelocityGrid};
        use std::sync::Arc;
        let d = Domain::ball(1.0);
        let model = CollisionModel::hard_spheres();
        let s = PathSampler::new(&d, &model, 0.9).unwrap();
        let g = Arc::new(VelocityGrid::new(GridSpec { v_max: 3.0, n_per_axis: 4 }).unwrap());
        let mesh = Arc::new(SpatialMesh::new(&d, MeshSpec { n_per_axis: 2, subsamples: 2 }).unwrap());
        let f0 = DistributionField::from_fn(g, mesh, bump);
        let bad = Weight::Polynomial { k: 3.0 };
        assert!(matches!(apply_semigroup(&s, 1.0, &bad, 1.0, &f0, 4), Err(TransportError::AdmissibilityViolation(_))));
        let good = Weight::Polynomial { k: 7.0 };
        let (same, _) = apply_semigroup(&s, 1.0, &good, 0.0, &f0, 4).unwrap();
        assert_eq!(same.values(), f0.values());
        let (a, _) = apply_semigroup(&s, 1.0, &good, 0.7, &f0, 16).unwrap();
        let (b, _) = apply_semigroup(&s, 1.0, &good, 0.7, &f0, 16).unwrap();
        assert_eq!(a.values(), b.values());
    }
}
