//! Path-memory statistics and the time-integrated semigroup.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::paths::{PathEnd, PathSampler};
use super::sampling::path_rng;
use super::TransportError;
use crate::gas_state::{DistributionField, SpatialMesh, VelocityGrid};
use crate::Vec3;

/// Random stream reserved for initial states of the survival study.
const STUDY_STREAM: u64 = u64::MAX - 1;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SurvivalRow {
    pub p: usize,
    /// Fraction of paths whose `(p + 1)`-th rebound still happens within the horizon.
    pub survival: f64,
    pub stderr: f64,
}

/// Trace `samples` Maxwell-wall paths from `x` uniform in the domain and `v ~ mu` over time
/// `t0`, and tabulate the fraction still rebounding after `p` rebounds, `p = 0..=p_max`. The
/// same seed gives the same initial states and uniform draws for every wall law.
pub fn remaining_mass_study(
    sampler: &PathSampler<'_>,
    t0: f64,
    samples: usize,
    p_max: usize,
) -> Result<Vec<SurvivalRow>, TransportError> {
    let domain = sampler.domain();
    let r = domain.bounding_radius();
    let zero = |_: &Vec3, _: &Vec3| 0.0;
    let counts: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut attempt = 0u64;
            loop {
                let mut rng = path_rng(sampler.seed(), STUDY_STREAM, (s as u64) * 64 + attempt);
                attempt += 1;
                let x = loop {
                    let y = Vec3::from_fn(|_, _| r * (2.0 * rng.random::<f64>() - 1.0));
                    if domain.is_interior(&y) {
                        break y;
                    }
                };
                let v = Vec3::from_fn(|_, _| rng.sample(StandardNormal));
                let path = sampler.run_path(t0, &x, &v, &zero, &mut rng, p_max + 1)?;
                if !matches!(path.end, PathEnd::Grazing | PathEnd::CapExceeded) || attempt >= 64 {
                    return Ok(path.rebounds + usize::from(path.end == PathEnd::Truncated));
                }
            }
        })
        .collect::<Result<_, TransportError>>()?;
    let n = samples as f64;
    Ok((0..=p_max)
        .map(|p| {
            let survival = counts.iter().filter(|&&c| c > p).count() as f64 / n;
            SurvivalRow { p, survival, stderr: (survival * (1.0 - survival) / n).sqrt() }
        })
        .collect())
}

/// `int_0^t S(t - s) f_s ds` at one phase point by the trapezoid rule on `n_time` intervals.
/// Every time node reuses the same path streams. Returns `(value, stderr bound)`.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_point<S>(
    sampler: &PathSampler<'_>,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    source: &S,
    n_time: usize,
    paths: usize,
    output: u64,
) -> Result<(f64, f64), TransportError>
where
    S: Fn(f64, &Vec3, &Vec3) -> f64 + Sync,
{
    let dt = t / n_time as f64;
    let (mut value, mut err) = (0.0, 0.0);
    for j in 0..=n_time {
        let s = j as f64 * dt;
        let w = if j == 0 || j == n_time { 0.5 * dt } else { dt };
        let f_s = move |y: &Vec3, u: &Vec3| source(s, y, u);
        let e = sampler.estimate(t - s, x, v, &f_s, paths, output, None)?;
        value += w * e.value;
        err += w * e.stderr;
    }
    Ok((value, err))
}

/// [`duhamel_point`] on every (cell, node) of a grid and mesh.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_time_integral<S>(
    sampler: &PathSampler<'_>,
    grid: Arc<VelocityGrid>,
    mesh: Arc<SpatialMesh>,
    t: f64,
    source: &S,
    n_time: usize,
    paths: usize,
) -> Result<DistributionField, TransportError>
where
    S: Fn(f64, &Vec3, &Vec3) -> f64 + Sync,
{
    let n_v = grid.len();
    let values: Vec<f64> = (0..mesh.len() * n_v)
        .into_par_iter()
        .map(|o| {
            let (c, k) = (o / n_v, o % n_v);
            duhamel_point(sampler, t, &mesh.cells()[c].point, grid.node(k), source, n_time, paths, o as u64).map(|e| e.0)
        })
        .collect::<Result<_, _>>()?;
    let mut out = DistributionField::zeros(grid, mesh);
    for (o, x) in values.into_iter().enumerate() {
        out.values_mut()[(o % n_v, o / n_v)] = x;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionModel;
    use crate::geometry::Domain;

    #[test]
    fn survival_is_monotone_and_reproducible() {
        let d = Domain::ball(1.0);
        let s = PathSampler::new(&d, &CollisionModel::hard_spheres(), 0.9).unwrap().with_seed(3);
        let a = remaining_mass_study(&s, 1.5, 4000, 8).unwrap();
        let b = remaining_mass_study(&s, 1.5, 4000, 8).unwrap();
        assert!(a.windows(2).all(|w| w[1].survival <= w[0].survival));
        assert!(a.iter().zip(&b).all(|(x, y)| x.survival == y.survival));
        assert!(a[0].survival > 0.5 && a[8].survival < 0.05);
    }

    #[test]
    fn duhamel_of_constant_source_without_walls() {
        let d = Domain::ball(1.0);
        let s = PathSampler::new(&d, &CollisionModel::hard_spheres(), 0.9).unwrap();
        let g = |_: f64, _: &Vec3, _: &Vec3| 0.7;
        let (x, v, t) = (Vec3::zeros(), Vec3::new(0.3, 0.0, 0.0), 0.2);
        let (val, err) = duhamel_point(&s, t, &x, &v, &g, 200, 1, 0).unwrap();
        let nu = s.frequency(0.3);
        let expect = (1.0 - (-nu * t).exp()) / nu * 0.7;
        assert_eq!(err, 0.0);
        assert!((val - expect).abs() < 1e-4 * expect, "{val} {expect}");
        let zero = |_: f64, _: &Vec3, _: &Vec3| 0.0;
        assert_eq!(duhamel_point(&s, 2.0, &x, &v, &zero, 10, 50, 1).unwrap().0, 0.0);
    }
}
