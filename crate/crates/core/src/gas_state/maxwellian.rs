//! The global equilibrium `mu(v) = (2 pi)^{-3/2} exp(-|v|^2 / 2)` and wall-flux normalization.

use std::f64::consts::PI;

use crate::geometry::tangent_frame;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre, integrate};
use crate::Vec3;

/// `(2 pi)^{-3/2}`.
pub const MU_PREFACTOR: f64 = 0.063_493_635_934_240_97;

#[inline]
pub fn maxwellian(v: &Vec3) -> f64 {
    MU_PREFACTOR * (-0.5 * v.norm_squared()).exp()
}

#[inline]
pub fn maxwellian_speed(r: f64) -> f64 {
    MU_PREFACTOR * (-0.5 * r * r).exp()
}

/// Flux normalization `c_mu`, the reciprocal of the half-space flux `int_{v.n>0} mu (v.n) dv`.
/// The tangential Gaussian factors integrate to one, leaving a 1-D normal integral.
pub fn c_mu() -> f64 {
    let normal = integrate(|z| z * (-0.5 * z * z).exp(), 0.0, 40.0, 24, 40);
    let flux = normal / (2.0 * PI).sqrt();
    1.0 / flux
}

/// Product rule for integrals over the outgoing half-space `{v : v.n > 0}`, expressed in the
/// local frame of `n` by speed, polar cosine and azimuth.
#[derive(Clone, Debug)]
pub struct HalfSpaceQuadrature {
    /// (speed, cos polar, azimuth, volume weight `r^2 dr dc dphi`).
    pub points: Vec<(f64, f64, f64, f64)>,
}

impl HalfSpaceQuadrature {
    pub fn new(n_speed: usize, n_cos: usize, n_azimuth: usize, speed_max: f64) -> Self {
        let speeds = composite_gauss_legendre(n_speed.max(2), 4, 0.0, speed_max);
        let cosines = gauss_legendre(n_cos, 0.0, 1.0);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut points = Vec::with_capacity(speeds.len() * cosines.len() * n_azimuth);
        for &(r, wr) in &speeds {
            for &(c, wc) in &cosines {
                for k in 0..n_azimuth {
                    let phi = (k as f64 + 0.5) * dphi;
                    points.push((r, c, phi, r * r * wr * wc * dphi));
                }
            }
        }
        Self { points }
    }

    /// Integrate `f(v)` over `v.n > 0`.
    pub fn integrate<F: FnMut(&Vec3) -> f64>(&self, n: &Vec3, mut f: F) -> f64 {
        let (e1, e2) = tangent_frame(n);
        self.points
            .iter()
            .map(|&(r, c, phi, w)| {
                let s = (1.0 - c * c).max(0.0).sqrt();
                let v = n * (r * c) + e1 * (r * s * phi.cos()) + e2 * (r * s * phi.sin());
                w * f(&v)
            })
            .sum()
    }
}

/// Outgoing flux `int_{v.n>0} mu(v) (v.n) dv` evaluated by the 3-D half-space rule.
pub fn half_space_flux(n: &Vec3) -> f64 {
    let rule = HalfSpaceQuadrature::new(16, 12, 8, 12.0);
    rule.integrate(n, |v| maxwellian(v) * v.dot(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_mu_is_sqrt_two_pi() {
        assert!((c_mu() - (2.0 * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn prefactor_matches_definition() {
        assert!((MU_PREFACTOR - (2.0 * PI).powf(-1.5)).abs() < 1e-17);
    }

    #[test]
    fn flux_is_rotation_invariant_and_normalized() {
        let cmu = c_mu();
        let a = half_space_flux(&Vec3::z());
        let b = half_space_flux(&Vec3::new(1.0, 1.0, 1.0).normalize());
        assert!((a * cmu - 1.0).abs() < 1e-8);
        assert!((a - b).abs() < 1e-8);
    }
}
