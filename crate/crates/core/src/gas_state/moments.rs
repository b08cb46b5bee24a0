//! Collision-invariant basis `{1, v, (|v|^2 - 3)/sqrt 6} sqrt(mu)` and hydrodynamic fields.

use nalgebra::{DMatrix, DVector, Matrix5, Vector5};
use serde::Serialize;

use super::grid::VelocityGrid;
use crate::Vec3;

/// The five kernel directions sampled on a grid together with their discrete Gram matrix.
/// Projections use the inverse Gram matrix, so they are exact projections on the grid even
/// though truncation leaves the sampled basis only approximately orthonormal.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    functions: DMatrix<f64>,
    gram: Matrix5<f64>,
    gram_inverse: Matrix5<f64>,
    weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HydrodynamicMoments {
    pub a: f64,
    pub b: Vec3,
    pub c: f64,
}

impl KernelBasis {
    pub fn new(grid: &VelocityGrid) -> Self {
        let sqrt6 = 6f64.sqrt();
        let functions = DMatrix::from_fn(grid.len(), 5, |k, a| {
            let v = grid.node(k);
            let s = grid.maxwellian()[k].sqrt();
            s * match a {
                0 => 1.0,
                1..=3 => v[a - 1],
                _ => (v.norm_squared() - 3.0) / sqrt6,
            }
        });
        let weight = grid.weight();
        let g = functions.transpose() * &functions * weight;
        let gram = Matrix5::from_fn(|i, j| g[(i, j)]);
        let gram_inverse = gram.try_inverse().expect("kernel Gram matrix is nonsingular");
        Self { functions, gram, gram_inverse, weight }
    }

    /// `N x 5` matrix whose columns are the sampled basis functions.
    pub fn functions(&self) -> &DMatrix<f64> {
        &self.functions
    }

    pub fn gram(&self) -> &Matrix5<f64> {
        &self.gram
    }

    /// Expansion coefficients of the projection of `h` onto the span.
    pub fn coefficients(&self, h: &[f64]) -> Vector5<f64> {
        let mut raw = Vector5::zeros();
        for (k, &hk) in h.iter().enumerate() {
            for a in 0..5 {
                raw[a] += self.functions[(k, a)] * hk;
            }
        }
        self.gram_inverse * (raw * self.weight)
    }

    pub fn project(&self, h: &[f64]) -> Vec<f64> {
        let beta = self.coefficients(h);
        let out: DVector<f64> = &self.functions * DVector::from_column_slice(beta.as_slice());
        out.as_slice().to_vec()
    }

    pub fn project_perp(&self, h: &[f64]) -> Vec<f64> {
        self.project(h).iter().zip(h).map(|(p, x)| x - p).collect()
    }

    /// `(a, b, c)` with `pi_L h = [a + b.v + c (|v|^2 - 3)/2] sqrt(mu)`.
    pub fn hydrodynamic_moments(&self, h: &[f64]) -> HydrodynamicMoments {
        let beta = self.coefficients(h);
        HydrodynamicMoments { a: beta[0], b: Vec3::new(beta[1], beta[2], beta[3]), c: 2.0 * beta[4] / 6f64.sqrt() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_state::grid::GridSpec;

    fn basis() -> (VelocityGrid, KernelBasis) {
        let g = VelocityGrid::new(GridSpec { v_max: 6.0, n_per_axis: 16 }).unwrap();
        let b = KernelBasis::new(&g);
        (g, b)
    }

    #[test]
    fn gram_is_near_identity() {
        let (_, b) = basis();
        assert!((b.gram() - Matrix5::identity()).abs().max() < 1e-3);
    }

    #[test]
    fn moments_of_basis_functions() {
        let (g, b) = basis();
        let sqrt_mu: Vec<f64> = g.maxwellian().iter().map(|m| m.sqrt()).collect();
        let m = b.hydrodynamic_moments(&sqrt_mu);
        assert!((m.a - 1.0).abs() < 1e-12 && m.b.norm() < 1e-12 && m.c.abs() < 1e-12);

        let h1: Vec<f64> = g.nodes().iter().zip(&sqrt_mu).map(|(v, s)| v.x * s).collect();
        let m = b.hydrodynamic_moments(&h1);
        assert!(m.a.abs() < 1e-12 && (m.b - Vec3::x()).norm() < 1e-12 && m.c.abs() < 1e-12);

        let h4: Vec<f64> = g.nodes().iter().zip(&sqrt_mu).map(|(v, s)| (v.norm_squared() - 3.0) / 6f64.sqrt() * s).collect();
        let m = b.hydrodynamic_moments(&h4);
        assert!((m.c - 2.0 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let (g, b) = basis();
        let h: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let p = b.project(&h);
        let pp = b.project(&p);
        let err = p.iter().zip(&pp).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
