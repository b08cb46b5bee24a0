//! Reproducible random streams and the diffuse wall law `c_mu mu(v) (v.n) dv` on `v.n > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::gas_state::{c_mu, maxwellian, HalfSpaceQuadrature};
use crate::geometry::{tangent_frame, Domain, GeometryError};
use crate::Vec3;

/// Counter-based stream for one path: the seed fixes the key, the output index selects the
/// stream, and the path index a disjoint block of `2^32` words within it.
pub fn path_rng(seed: u64, output: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(output);
    rng.set_word_pos(u128::from(path) << 32);
    rng
}

/// Draw from the diffuse law at a wall with outward normal `n`: Rayleigh normal component by
/// inversion, standard normal tangential components.
pub fn sample_diffuse_velocity<R: Rng + ?Sized>(n: &Vec3, rng: &mut R) -> Vec3 {
    let (e1, e2) = tangent_frame(n);
    let u: f64 = rng.random();
    let z = (-2.0 * (1.0 - u).ln()).sqrt();
    let t1: f64 = rng.sample(StandardNormal);
    let t2: f64 = rng.sample(StandardNormal);
    n * z + e1 * t1 + e2 * t2
}

#[derive(Clone, Copy, Debug)]
pub struct BoundarySamplingMeasure {
    pub point: Vec3,
    pub normal: Vec3,
}

impl BoundarySamplingMeasure {
    pub fn new(domain: &Domain, x: &Vec3) -> Result<Self, GeometryError> {
        Ok(Self { point: *x, normal: domain.outward_normal(x)? })
    }

    pub fn density(&self, v: &Vec3) -> f64 {
        c_mu() * maxwellian(v) * v.dot(&self.normal).max(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        HalfSpaceQuadrature::new(16, 16, 16, 12.0).integrate(&self.normal, |v| self.density(v))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        sample_diffuse_velocity(&self.normal, rng)
    }
}

/// Chi-square goodness of fit of normal components against the Rayleigh law, on `bins`
/// equiprobable bins. Returns `(statistic, p-value)`.
pub fn rayleigh_chi_square(samples: &[f64], bins: usize) -> (f64, f64) {
    let mut counts = vec![0usize; bins];
    for z in samples {
        let cdf = 1.0 - (-0.5 * z * z).exp();
        counts[((cdf * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = samples.len() as f64 / bins as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |mut r: ChaCha8Rng| (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>();
        let (a, b) = (draw(path_rng(7, 3, 11)), draw(path_rng(7, 3, 11)));
        let (c, d) = (draw(path_rng(7, 3, 12)), draw(path_rng(7, 4, 11)));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn measure_has_unit_mass_and_outgoing_samples() {
        let m = BoundarySamplingMeasure { point: Vec3::z(), normal: Vec3::new(1.0, 1.0, 1.0).normalize() };
        assert!((m.total_mass() - 1.0).abs() < 1e-6);
        let mut rng = path_rng(1, 0, 0);
        assert!((0..1000).all(|_| m.sample(&mut rng).dot(&m.normal) > 0.0));
    }
}
