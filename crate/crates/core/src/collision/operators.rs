//! Quadrature of the collision integrals on a velocity grid.
//!
//! Every integral is a sum over grid partners `v*` and sphere nodes `sigma`, with the
//! post-collision values interpolated. In `Direct` mode `f` itself is interpolated; in the ratio
//! modes `f / mu` is, and the product `mu(v') mu(v'*)` is replaced by `mu(v) mu(v*)`, which makes
//! `mu` an exact equilibrium of the discrete operator.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::kernel::{relative_frame, CollisionModel};
use crate::gas_state::{Interp, VelocityGrid};
use crate::Vec3;

/// One `(v*, sigma)` quadrature point for a fixed output velocity.
#[derive(Clone, Copy, Debug)]
pub struct CollisionSample {
    pub j: usize,
    /// `C_Phi |v - v*|^gamma b(cos theta) w_sigma h^3`.
    pub weight: f64,
    pub relative_speed: f64,
    pub cos_theta: f64,
    pub v_post: Vec3,
    pub v_post_star: Vec3,
}

impl CollisionModel {
    /// Visit every quadrature point of the collision integral at node `i`.
    pub fn for_each_collision<F: FnMut(&CollisionSample)>(&self, grid: &VelocityGrid, i: usize, mut visit: F) {
        let v = *grid.node(i);
        let w = grid.weight();
        for (j, vs) in grid.nodes().iter().enumerate() {
            let rel = v - vs;
            let r = rel.norm();
            let phi = self.kinetic(r);
            if phi == 0.0 {
                continue;
            }
            let (k, e1, e2) = relative_frame(&rel, r);
            let center = (v + vs) * 0.5;
            let half = 0.5 * r;
            for node in &self.sphere().nodes {
                let [c, s, cp, sp, ws] = *node;
                let sigma = k * c + e1 * (s * cp) + e2 * (s * sp);
                visit(&CollisionSample {
                    j,
                    weight: phi * ws * w,
                    relative_speed: r,
                    cos_theta: c,
                    v_post: center + sigma * half,
                    v_post_star: center - sigma * half,
                });
            }
        }
    }

    /// Loss matrix `M_ij = C_Phi l_b |v_i - v_j|^gamma h^3`, so `q(f) = M f`.
    pub fn loss_matrix(&self, grid: &VelocityGrid) -> DMatrix<f64> {
        let scale = self.l_b() * grid.weight();
        let nodes = grid.nodes();
        DMatrix::from_fn(grid.len(), grid.len(), |i, j| scale * self.kinetic((nodes[i] - nodes[j]).norm()))
    }

    /// `q(f)(v) = int int B f(v*) d sigma dv*`.
    pub fn loss_rate(&self, grid: &VelocityGrid, f: &[f64]) -> Vec<f64> {
        let scale = self.l_b() * grid.weight();
        let nodes = grid.nodes();
        (0..grid.len())
            .into_par_iter()
            .map(|i| scale * nodes.iter().zip(f).map(|(vs, fj)| self.kinetic((nodes[i] - vs).norm()) * fj).sum::<f64>())
            .collect()
    }

    /// `nu = q(mu)` on the grid.
    pub fn frequency_on_grid(&self, grid: &VelocityGrid) -> Vec<f64> {
        self.loss_rate(grid, grid.maxwellian())
    }

    /// Gain integrals `G(f, g)(v_i) = int int B f(v') g(v'*)` for several pairs of functions at
    /// the listed output nodes. Returns `out[pair][position in nodes]`.
    pub fn gain_integrals(
        &self,
        grid: &VelocityGrid,
        mode: Interp,
        functions: &[&[f64]],
        pairs: &[(usize, usize)],
        nodes: &[usize],
    ) -> Vec<Vec<f64>> {
        let mu = grid.maxwellian();
        let framed: Vec<Vec<f64>> = functions
            .iter()
            .map(|f| match mode {
                Interp::Direct => f.to_vec(),
                _ => f.iter().zip(mu).map(|(x, m)| x / m).collect(),
            })
            .collect();
        let nf = functions.len();
        let per_node: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|&i| {
                let mut acc = vec![0.0; pairs.len()];
                let mut a = vec![0.0; nf];
                let mut b = vec![0.0; nf];
                self.for_each_collision(grid, i, |s| {
                    let sp = grid.raw_stencil(&s.v_post, mode);
                    let ss = grid.raw_stencil(&s.v_post_star, mode);
                    for u in 0..nf {
                        a[u] = sp.apply(&framed[u]);
                        b[u] = ss.apply(&framed[u]);
                    }
                    let pre = match mode {
                        Interp::Direct => s.weight,
                        _ => s.weight * mu[i] * mu[s.j],
                    };
                    for (p, &(x, y)) in pairs.iter().enumerate() {
                        acc[p] += pre * a[x] * b[y];
                    }
                });
                acc
            })
            .collect();
        (0..pairs.len()).map(|p| per_node.iter().map(|row| row[p]).collect()).collect()
    }

    pub fn gain(&self, grid: &VelocityGrid, f: &[f64], g: &[f64], mode: Interp) -> Vec<f64> {
        let all: Vec<usize> = (0..grid.len()).collect();
        self.gain_integrals(grid, mode, &[f, g], &[(0, 1)], &all).remove(0)
    }

    /// Symmetric bilinear `Q(f, g)` at the listed nodes.
    pub fn q_bilinear_at(&self, grid: &VelocityGrid, f: &[f64], g: &[f64], mode: Interp, nodes: &[usize]) -> Vec<f64> {
        let gains = self.gain_integrals(grid, mode, &[f, g], &[(0, 1), (1, 0)], nodes);
        let qf = self.loss_rate(grid, f);
        let qg = self.loss_rate(grid, g);
        nodes.iter().enumerate().map(|(p, &i)| 0.5 * (gains[0][p] + gains[1][p]) - 0.5 * (f[i] * qg[i] + g[i] * qf[i])).collect()
    }

    pub fn q_bilinear(&self, grid: &VelocityGrid, f: &[f64], g: &[f64], mode: Interp) -> Vec<f64> {
        let all: Vec<usize> = (0..grid.len()).collect();
        self.q_bilinear_at(grid, f, g, mode, &all)
    }

    /// `(Q+(F, F), q(F))` with `Q(F, F) = Q+(F, F) - q(F) F`.
    pub fn gain_loss_split(&self, grid: &VelocityGrid, big_f: &[f64], mode: Interp) -> (Vec<f64>, Vec<f64>) {
        (self.gain(grid, big_f, big_f, mode), self.loss_rate(grid, big_f))
    }

    /// `K f = int int B [mu' f'* + mu'* f' - mu f*]` at the listed nodes.
    pub fn k_apply_at(&self, grid: &VelocityGrid, f: &[f64], mode: Interp, nodes: &[usize]) -> Vec<f64> {
        let mu = grid.maxwellian();
        let gains = self.gain_integrals(grid, mode, &[mu, f], &[(0, 1), (1, 0)], nodes);
        let qf = self.loss_rate(grid, f);
        nodes.iter().enumerate().map(|(p, &i)| gains[0][p] + gains[1][p] - mu[i] * qf[i]).collect()
    }

    pub fn k_apply(&self, grid: &VelocityGrid, f: &[f64], mode: Interp) -> Vec<f64> {
        let all: Vec<usize> = (0..grid.len()).collect();
        self.k_apply_at(grid, f, mode, &all)
    }

    /// `L f = 2 Q(mu, f) = -nu f + K f`.
    pub fn linearized(&self, grid: &VelocityGrid, f: &[f64], mode: Interp) -> Vec<f64> {
        let nu = self.frequency_on_grid(grid);
        self.k_apply(grid, f, mode).iter().zip(&nu).zip(f).map(|((k, n), x)| k - n * x).collect()
    }

    /// Row `i` of the compact part split by a cut-off `theta(|v|, |v - v*|, cos theta)`: the
    /// first row carries `theta`, the second `1 - theta` (empty when `theta` is `None`).
    pub fn compact_row<T>(&self, grid: &VelocityGrid, mode: Interp, i: usize, theta: Option<&T>) -> (Vec<f64>, Vec<f64>)
    where
        T: Fn(f64, f64, f64) -> f64,
    {
        let n = grid.len();
        let mu = grid.maxwellian();
        let speed = grid.node(i).norm();
        let mut kept = vec![0.0; n];
        let mut rest = vec![0.0; if theta.is_some() { n } else { 0 }];
        self.for_each_collision(grid, i, |s| {
            let th = theta.map_or(1.0, |t| t(speed, s.relative_speed, s.cos_theta));
            let sp = grid.raw_stencil(&s.v_post, mode);
            let ss = grid.raw_stencil(&s.v_post_star, mode);
            let scatter = |row: &mut Vec<f64>, share: f64| {
                if share == 0.0 {
                    return;
                }
                let w = s.weight * share;
                match mode {
                    Interp::Direct => {
                        let mu_p = sp.apply(mu);
                        let mu_ps = ss.apply(mu);
                        for (k, c) in ss.iter() {
                            row[k] += w * mu_p * c;
                        }
                        for (k, c) in sp.iter() {
                            row[k] += w * mu_ps * c;
                        }
                    }
                    _ => {
                        let pre = w * mu[i] * mu[s.j];
                        for (k, c) in ss.iter().chain(sp.iter()) {
                            row[k] += pre * c / mu[k];
                        }
                    }
                }
                row[s.j] -= w * mu[i];
            };
            scatter(&mut kept, th);
            if theta.is_some() {
                scatter(&mut rest, 1.0 - th);
            }
        });
        (kept, rest)
    }

    /// Dense matrices of the compact part split by `theta`; see [`CollisionModel::compact_row`].
    /// With `theta = None` the first is the whole of `K` and the second is zero.
    pub fn assemble_compact_part<T>(&self, grid: &VelocityGrid, mode: Interp, theta: Option<&T>) -> (DMatrix<f64>, DMatrix<f64>)
    where
        T: Fn(f64, f64, f64) -> f64 + Sync,
    {
        let n = grid.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n).into_par_iter().map(|i| self.compact_row(grid, mode, i, theta)).collect();
        let kept = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
        let rest = if theta.is_some() { DMatrix::from_fn(n, n, |i, j| rows[i].1[j]) } else { DMatrix::zeros(n, n) };
        (kept, rest)
    }

    pub fn k_matrix(&self, grid: &VelocityGrid, mode: Interp) -> DMatrix<f64> {
        self.assemble_compact_part::<fn(f64, f64, f64) -> f64>(grid, mode, None).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::GridSpec;

    fn small() -> (CollisionModel, VelocityGrid) {
        let m = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(6, 6)).unwrap();
        let g = VelocityGrid::new(GridSpec { v_max: 4.5, n_per_axis: 8 }).unwrap();
        (m, g)
    }

    fn bump(g: &VelocityGrid, shift: f64) -> Vec<f64> {
        g.nodes().iter().map(|v| (-(v - Vec3::new(shift, 0.2, -0.1)).norm_squared()).exp() * (1.0 + 0.3 * v.x)).collect()
    }

    #[test]
    fn q_is_symmetric_exactly() {
        let (m, g) = small();
        let (f, h) = (bump(&g, 0.5), bump(&g, -0.7));
        let nodes = [0, 100, 273, 400];
        let a = m.q_bilinear_at(&g, &f, &h, Interp::Direct, &nodes);
        let b = m.q_bilinear_at(&g, &h, &f, Interp::Direct, &nodes);
        assert_eq!(a, b);
    }

    #[test]
    fn k_of_zero_is_zero() {
        let (m, g) = small();
        let zero = vec![0.0; g.len()];
        assert!(m.k_apply_at(&g, &zero, Interp::Direct, &[0, 5, 300]).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn split_recombines_and_is_positive() {
        let (m, g) = small();
        let f: Vec<f64> = bump(&g, 0.3).iter().map(|x| x.abs()).collect();
        let (plus, q) = m.gain_loss_split(&g, &f, Interp::Direct);
        assert!(plus.iter().all(|x| *x >= 0.0) && q.iter().all(|x| *x >= 0.0));
        let full = m.q_bilinear(&g, &f, &f, Interp::Direct);
        for i in 0..g.len() {
            assert!((plus[i] - q[i] * f[i] - full[i]).abs() <= 1e-12 * (plus[i].abs() + 1e-300).max(1e-14));
        }
    }

    #[test]
    fn ratio_mode_is_well_balanced() {
        let (m, g) = small();
        let mu = g.maxwellian();
        let nu = m.frequency_on_grid(&g);
        let (plus, q) = m.gain_loss_split(&g, mu, Interp::Ratio);
        for i in 0..g.len() {
            assert!((q[i] - nu[i]).abs() < 1e-12 * nu[i]);
            assert!((plus[i] - nu[i] * mu[i]).abs() < 1e-11 * nu[i] * mu[i]);
        }
    }

    #[test]
    fn matrix_matches_matrix_free_k() {
        let (m, g) = small();
        let f = bump(&g, 0.1);
        for mode in [Interp::Direct, Interp::Ratio] {
            let k = m.k_matrix(&g, mode);
            let dense = &k * nalgebra::DVector::from_column_slice(&f);
            let free = m.k_apply(&g, &f, mode);
            let scale = free.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for i in 0..g.len() {
                assert!((dense[i] - free[i]).abs() < 1e-10 * scale, "{mode:?} node {i}");
            }
        }
    }

    #[test]
    fn loss_matrix_reproduces_frequency() {
        let (m, g) = small();
        let nu = m.frequency_on_grid(&g);
        let via = m.loss_matrix(&g) * nalgebra::DVector::from_column_slice(g.maxwellian());
        for i in 0..g.len() {
            assert!((via[i] - nu[i]).abs() < 1e-12 * nu[i]);
        }
    }
}
