//! Projections onto the collision kernel, onto global mass, and onto the diffuse wall profile.

use crate::gas_state::{DistributionField, KernelBasis, VelocityGrid};
use crate::geometry::Domain;
use crate::Vec3;

use super::LinearOpsError;

/// Fluid part `pi_L h` in the `L^2_v` frame.
pub fn pi_l(basis: &KernelBasis, h: &[f64]) -> Vec<f64> {
    basis.project(h)
}

pub fn pi_l_perp(basis: &KernelBasis, h: &[f64]) -> Vec<f64> {
    basis.project_perp(h)
}

/// `Pi_G f = (int int f dx dv) mu`.
pub fn pi_g(f: &DistributionField) -> DistributionField {
    let mass = f.total_mass();
    let mu = f.grid().maxwellian();
    let mut out = DistributionField::zeros(f.grid().clone(), f.mesh().clone());
    for mut col in out.values_mut().column_iter_mut() {
        for (x, m) in col.iter_mut().zip(mu) {
            *x = mass * m;
        }
    }
    out
}

/// The factor `Pi_G Pi_G = s Pi_G`: the discrete mass of `mu` over the mesh, `|Omega| int mu`.
/// It is one on the whole space and slightly off on a truncated grid and voxelized domain.
pub fn pi_g_normalization(f: &DistributionField) -> f64 {
    DistributionField::maxwellian(f.grid().clone(), f.mesh().clone()).total_mass()
}

/// Diffuse wall projections at one boundary point, with the flux normalization computed on the
/// grid itself so the wall balances mass exactly in the discrete setting.
#[derive(Clone, Debug)]
pub struct WallProjection {
    normal: Vec3,
    /// `h^3 (v.n)` on outgoing nodes, `0` elsewhere.
    flux_weight: Vec<f64>,
    /// `h^3 |v.n|` on ingoing nodes, `0` elsewhere.
    influx_weight: Vec<f64>,
    c_mu: f64,
}

impl WallProjection {
    pub fn new(domain: &Domain, grid: &VelocityGrid, x: &Vec3) -> Result<Self, LinearOpsError> {
        if !domain.on_boundary(x) {
            return Err(LinearOpsError::NotOnBoundary([x.x, x.y, x.z]));
        }
        Ok(Self::at_normal(grid, &domain.outward_normal(x)?))
    }

    pub fn at_normal(grid: &VelocityGrid, n: &Vec3) -> Self {
        let w = grid.weight();
        let dots: Vec<f64> = grid.nodes().iter().map(|v| v.dot(n)).collect();
        let flux_weight: Vec<f64> = dots.iter().map(|d| w * d.max(0.0)).collect();
        let influx_weight: Vec<f64> = dots.iter().map(|d| w * (-d).max(0.0)).collect();
        let flux: f64 = flux_weight.iter().zip(grid.maxwellian()).map(|(a, m)| a * m).sum();
        Self { normal: *n, flux_weight, influx_weight, c_mu: 1.0 / flux }
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    /// Discrete `c_mu(n)`.
    pub fn c_mu(&self) -> f64 {
        self.c_mu
    }

    pub fn flux_weights(&self) -> &[f64] {
        &self.flux_weight
    }

    /// `int_{v.n>0} F (v.n) dv`.
    pub fn outgoing_flux(&self, f: &[f64]) -> f64 {
        self.flux_weight.iter().zip(f).map(|(a, x)| a * x).sum()
    }

    /// `int_{v.n<0} F |v.n| dv`.
    pub fn ingoing_flux(&self, f: &[f64]) -> f64 {
        self.influx_weight.iter().zip(f).map(|(a, x)| a * x).sum()
    }

    /// `P_Lambda F = c_mu mu(v) int_{v*.n>0} F (v*.n)` on ingoing nodes, zero elsewhere.
    pub fn p_lambda(&self, grid: &VelocityGrid, f: &[f64]) -> Vec<f64> {
        let j = self.c_mu * self.outgoing_flux(f);
        grid.maxwellian().iter().zip(&self.influx_weight).map(|(m, a)| if *a > 0.0 { j * m } else { 0.0 }).collect()
    }

    /// `P_{Lambda_mu} h = c_mu sqrt(mu) int_{v*.n>0} h sqrt(mu*) (v*.n)`, as a projection of
    /// functions on the outgoing half; zero on the other nodes.
    pub fn p_lambda_mu(&self, grid: &VelocityGrid, h: &[f64]) -> Vec<f64> {
        let mu = grid.maxwellian();
        let inner: f64 = self.flux_weight.iter().zip(h).zip(mu).map(|((a, x), m)| a * x * m.sqrt()).sum();
        let s = self.c_mu * inner;
        mu.iter().zip(&self.flux_weight).map(|(m, a)| if *a > 0.0 { s * m.sqrt() } else { 0.0 }).collect()
    }

    pub fn p_lambda_mu_perp(&self, grid: &VelocityGrid, h: &[f64]) -> Vec<f64> {
        self.p_lambda_mu(grid, h).iter().zip(h).map(|(p, x)| x - p).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_state::{GridSpec, MeshSpec, SpatialMesh};
    use std::sync::Arc;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: 12 }).unwrap()
    }

    #[test]
    fn pi_l_fixes_the_kernel_and_is_idempotent() {
        let g = grid();
        let basis = KernelBasis::new(&g);
        let phi2: Vec<f64> = basis.functions().column(2).iter().copied().collect();
        let p = pi_l(&basis, &phi2);
        assert!(p.iter().zip(&phi2).all(|(a, b)| (a - b).abs() < 1e-12));
        let h: Vec<f64> = g.nodes().iter().map(|v| (v.x * 1.3 - v.y * v.z).sin() * (-0.2 * v.norm_squared()).exp()).collect();
        let once = pi_l(&basis, &h);
        let twice = pi_l(&basis, &once);
        assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-12));
        let perp = pi_l_perp(&basis, &h);
        assert!(basis.coefficients(&perp).norm() < 1e-12);
    }

    #[test]
    fn pi_g_scales_and_kills_odd_fields() {
        let g = Arc::new(grid());
        let mesh = Arc::new(SpatialMesh::new(&Domain::ball(1.0), MeshSpec { n_per_axis: 4, subsamples: 4 }).unwrap());
        let mu = DistributionField::maxwellian(g.clone(), mesh.clone());
        let s = pi_g_normalization(&mu);
        let p = pi_g(&mu);
        assert!((p.values()[(0, 0)] - s * g.maxwellian()[0]).abs() < 1e-15);
        let pp = pi_g(&p);
        let diff = (pp.values() - p.values() * s).amax();
        assert!(diff < 1e-12 * p.values().amax(), "{diff}");
        let odd = DistributionField::from_fn(g, mesh, |x, v| v.x * (1.0 + x.y) * (-v.norm_squared()).exp());
        assert_eq!(pi_g(&odd).values().amax(), 0.0);
    }

    #[test]
    fn wall_reemits_equilibrium_and_balances_flux() {
        let g = grid();
        let d = Domain::ball(1.0);
        let x = Vec3::new(1.0, 1.0, 1.0).normalize();
        let wall = WallProjection::new(&d, &g, &x).unwrap();
        let mu = g.maxwellian();
        let p = wall.p_lambda(&g, mu);
        for (k, v) in g.nodes().iter().enumerate() {
            if v.dot(&x) < 0.0 {
                assert!((p[k] - mu[k]).abs() < 1e-14 * mu[k].max(1e-300));
            }
        }
        let f: Vec<f64> = g.nodes().iter().map(|v| (-(v - Vec3::new(0.4, -0.2, 0.1)).norm_squared()).exp()).collect();
        let emitted = wall.ingoing_flux(&wall.p_lambda(&g, &f));
        assert!((emitted - wall.outgoing_flux(&f)).abs() < 1e-12 * emitted);
        assert!((wall.c_mu() / crate::gas_state::c_mu() - 1.0).abs() < 2e-2, "{}", wall.c_mu());
    }

    #[test]
    fn p_lambda_mu_is_a_projection_with_complement() {
        let g = grid();
        let wall = WallProjection::at_normal(&g, &Vec3::new(0.0, 0.6, 0.8));
        let h: Vec<f64> = g.nodes().iter().map(|v| (v.y + 0.5 * v.z * v.x) * (-0.3 * v.norm_squared()).exp()).collect();
        let p = wall.p_lambda_mu(&g, &h);
        let pp = wall.p_lambda_mu(&g, &p);
        let scale = p.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-12 * scale));
        let perp = wall.p_lambda_mu_perp(&g, &h);
        assert!(perp.iter().zip(&p).zip(&h).all(|((a, b), c)| (a + b - c).abs() <= 1e-15 * c.abs().max(scale)));
    }

    #[test]
    fn off_boundary_point_is_rejected() {
        let g = grid();
        let err = WallProjection::new(&Domain::ball(1.0), &g, &Vec3::new(0.5, 0.0, 0.0));
        assert!(matches!(err, Err(LinearOpsError::NotOnBoundary(_))));
    }
}
