//! Collision operators applied cell by cell to value matrices (nodes x cells).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::collision::CollisionModel;
use crate::gas_state::{Interp, Stencil, VelocityGrid};
use crate::linear_ops::MollifierSpec;

/// Matrices of the linear parts on one velocity grid, plus the batched quadratic part.
/// Everything uses `Ratio` interpolation, which makes `mu` an exact discrete equilibrium:
/// `Q+(mu, mu) = nu mu` with `nu = q(mu)`.
#[derive(Clone, Debug)]
pub struct CollisionOps {
    model: CollisionModel,
    grid: Arc<VelocityGrid>,
    nu: DVector<f64>,
    loss: DMatrix<f64>,
    k: DMatrix<f64>,
    a: DMatrix<f64>,
    b2: DMatrix<f64>,
}

impl CollisionOps {
    pub fn new(model: &CollisionModel, grid: Arc<VelocityGrid>, mollifier: &MollifierSpec) -> Self {
        let theta = |s: f64, r: f64, c: f64| mollifier.theta(s, r, c);
        let (a, b2) = model.assemble_compact_part(&grid, Interp::Ratio, Some(&theta));
        let k = &a + &b2;
        let loss = model.loss_matrix(&grid);
        let nu = &loss * DVector::from_column_slice(grid.maxwellian());
        Self { model: model.clone(), grid, nu, loss, k, a, b2 }
    }

    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn nu(&self) -> &DVector<f64> {
        &self.nu
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b2(&self) -> &DMatrix<f64> {
        &self.b2
    }

    /// `q(F)` per cell.
    pub fn loss_rate(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        &self.loss * f
    }

    /// `Q+(F, F)` per cell. All cells share one sweep over the collision quadrature; the ratio
    /// `F / mu` is laid out node-major so the per-sample work is a contiguous loop over cells.
    pub fn gain(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let grid = &*self.grid;
        let (n, cells) = f.shape();
        let mu = grid.maxwellian();
        let ratio: Vec<f64> = (0..n).flat_map(|k| (0..cells).map(move |c| f[(k, c)] / mu[k])).collect();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![0.0; cells];
                let mut a = vec![0.0; cells];
                let mut b = vec![0.0; cells];
                self.model.for_each_collision(grid, i, |s| {
                    let sp = grid.raw_stencil(&s.v_post, Interp::Ratio);
                    let ss = grid.raw_stencil(&s.v_post_star, Interp::Ratio);
                    gather(&ratio, cells, &sp, &mut a);
                    gather(&ratio, cells, &ss, &mut b);
                    let pre = s.weight * mu[i] * mu[s.j];
                    for ((o, x), y) in acc.iter_mut().zip(&a).zip(&b) {
                        *o += pre * x * y;
                    }
                });
                acc
            })
            .collect();
        DMatrix::from_fn(n, cells, |k, c| rows[k][c])
    }

    /// `Q(f, f) = Q+(f, f) - q(f) f` per cell.
    pub fn quadratic(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        self.gain(f) - self.loss_rate(f).component_mul(f)
    }
}

/// `out[c] = sum_a coef_a values[idx_a][c]` for node-major `values`.
fn gather(values: &[f64], cells: usize, st: &Stencil, out: &mut [f64]) {
    out.fill(0.0);
    for (k, w) in st.iter() {
        for (o, v) in out.iter_mut().zip(&values[k * cells..(k + 1) * cells]) {
            *o += w * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::GridSpec;

    fn ops() -> CollisionOps {
        let model = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(4, 4)).unwrap();
        let grid = Arc::new(VelocityGrid::new(GridSpec { v_max: 3.6, n_per_axis: 6 }).unwrap());
        CollisionOps::new(&model, grid, &MollifierSpec::new(0.1).unwrap())
    }

    #[test]
    fn batched_gain_matches_the_per_function_quadrature() {
        let o = ops();
        let grid = o.grid().clone();
        let f = DMatrix::from_fn(grid.len(), 2, |k, c| grid.maxwellian()[k] * (1.0 + 0.2 * grid.node(k)[c] + 0.1 * c as f64));
        let batched = o.gain(&f);
        for c in 0..2 {
            let col: Vec<f64> = f.column(c).iter().copied().collect();
            let single = o.model.gain(&grid, &col, &col, Interp::Ratio);
            for k in 0..grid.len() {
                assert!((batched[(k, c)] - single[k]).abs() < 1e-14 * (1.0 + single[k].abs()));
            }
        }
    }

    #[test]
    fn maxwellian_is_an_exact_equilibrium() {
        let o = ops();
        let mu = DMatrix::from_fn(o.grid().len(), 3, |k, _| o.grid().maxwellian()[k]);
        let q = o.quadratic(&mu);
        assert!(q.abs().max() < 1e-13, "{}", q.abs().max());
        let kmu = o.k() * &mu;
        let numu = DMatrix::from_fn(mu.nrows(), 3, |k, c| o.nu()[k] * mu[(k, c)]);
        assert!((kmu - numu).abs().max() < 1e-13);
    }

    #[test]
    fn quadratic_polarizes_to_the_linearized_operator() {
        let o = ops();
        let grid = o.grid().clone();
        let mu = DVector::from_column_slice(grid.maxwellian());
        let g = DVector::from_iterator(
            grid.len(),
            grid.nodes().iter().zip(grid.maxwellian()).map(|(v, m)| m * (v.x + 0.3 * v.y * v.y)),
        );
        let eps = 1e-3;
        let plus = o.quadratic(&DMatrix::from_columns(&[&mu + &g * eps]));
        let minus = o.quadratic(&DMatrix::from_columns(&[&mu - &g * eps]));
        let l = (plus - minus) / (2.0 * eps);
        let direct = o.k() * &g - g.component_mul(o.nu());
        assert!((l.column(0) - direct).abs().max() < 1e-10);
    }
}
