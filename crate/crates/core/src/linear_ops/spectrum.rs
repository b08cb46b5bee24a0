//! Dense spectrum of `h -> mu^{-1/2} L (mu^{1/2} h)` on a small grid.
//!
//! The compact part is assembled with the conservative stencil, which makes the five collision
//! invariants exact null vectors of the discrete loss-gain balance up to truncation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::collision::CollisionModel;
use crate::gas_state::{Interp, KernelBasis, VelocityGrid};

use super::LinearOpsError;

pub const SPECTRAL_MAX_N: usize = 16;
/// Largest accepted relative Frobenius asymmetry `|M - M^T| / |M|` before symmetrizing.
pub const ASYMMETRY_TOL: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalues of the symmetrized operator, largest first.
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    /// Distance from zero to the first eigenvalue below `-gap_tol`.
    pub gap: f64,
    pub gap_tol: f64,
    pub asymmetry: f64,
    /// Eigenvalues of the operator compressed onto the collision invariants.
    pub kernel_rayleigh: Vec<f64>,
    /// Frobenius norm of `M Q - Q (Q^T M Q)` for the orthonormalized invariants `Q`.
    pub kernel_residual: f64,
    /// Smallest squared projection onto the invariants among the five kernel eigenvectors.
    pub kernel_overlap: f64,
}

impl SpectrumReport {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Symmetrized matrix of the weighted operator together with its relative asymmetry.
pub fn weighted_operator(model: &CollisionModel, grid: &VelocityGrid) -> (DMatrix<f64>, f64) {
    let mut l = model.k_matrix(grid, Interp::Conservative);
    let nu = model.frequency_on_grid(grid);
    for (i, n) in nu.iter().enumerate() {
        l[(i, i)] -= n;
    }
    let sq: Vec<f64> = grid.maxwellian().iter().map(|m| m.sqrt()).collect();
    let m = DMatrix::from_fn(grid.len(), grid.len(), |i, j| l[(i, j)] * sq[j] / sq[i]);
    let asymmetry = (&m - m.transpose()).norm() / m.norm();
    ((&m + m.transpose()) * 0.5, asymmetry)
}

pub fn spectral_gap_estimate(model: &CollisionModel, grid: &VelocityGrid) -> Result<SpectrumReport, LinearOpsError> {
    if grid.n_per_axis() > SPECTRAL_MAX_N {
        return Err(LinearOpsError::GridTooLarge(grid.n_per_axis()));
    }
    let (sym, asymmetry) = weighted_operator(model, grid);
    let q = KernelBasis::new(grid).functions().clone().qr().q();
    let mq = &sym * &q;
    let compressed = q.transpose() * &mq;
    let kernel_residual = (&mq - &q * &compressed).norm();
    let mut kernel_rayleigh: Vec<f64> = SymmetricEigen::new(compressed).eigenvalues.iter().copied().collect();
    kernel_rayleigh.sort_by(|a, b| b.total_cmp(a));
    let eig = SymmetricEigen::new(sym);
    // The five eigenvectors closest to the invariant subspace carry the discrete kernel; their
    // eigenvalue magnitudes measure how far discretization has moved it off zero.
    let overlap = q.transpose() * &eig.eigenvectors;
    let mut by_overlap: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    by_overlap.sort_by(|&a, &b| overlap.column(b).norm_squared().total_cmp(&overlap.column(a).norm_squared()));
    let kernel_overlap = by_overlap[..5].iter().map(|&k| overlap.column(k).norm_squared()).fold(1.0, f64::min);
    let spread = by_overlap[..5].iter().map(|&k| eig.eigenvalues[k].abs()).fold(0.0, f64::max);
    let gap_tol = 10.0 * spread;
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let kernel_dim = eigenvalues.iter().filter(|e| e.abs() < gap_tol).count();
    let gap = eigenvalues.iter().find(|e| **e <= -gap_tol).map_or(0.0, |e| -e);
    Ok(SpectrumReport { eigenvalues, kernel_dim, gap, gap_tol, asymmetry, kernel_rayleigh, kernel_residual, kernel_overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::GridSpec;

    #[test]
    fn oversized_grid_is_rejected() {
        let g = VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: 18 }).unwrap();
        let m = CollisionModel::hard_spheres();
        assert!(matches!(spectral_gap_estimate(&m, &g), Err(LinearOpsError::GridTooLarge(18))));
    }

    #[test]
    fn coarse_spectrum_has_five_dimensional_kernel() {
        let g = VelocityGrid::new(GridSpec { v_max: 4.0, n_per_axis: 8 }).unwrap();
        let m = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(8, 8)).unwrap();
        let r = spectral_gap_estimate(&m, &g).unwrap();
        assert_eq!(r.kernel_dim, 5, "{:?} {:?}", &r.eigenvalues[..8], r.kernel_overlap);
        assert!(r.kernel_overlap > 0.9);
        assert!(r.gap > 0.0 && r.max_eigenvalue() < r.gap_tol);
        assert!(r.asymmetry < ASYMMETRY_TOL);
    }
}
