//! Truncated cell-centred velocity lattice on `[-v_max, v_max]^3` and off-grid interpolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::maxwellian::{maxwellian, MU_PREFACTOR};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("velocity grid needs n_per_axis >= 2 and v_max > 0 (got n = {n}, v_max = {v_max})")]
    InvalidGrid { n: usize, v_max: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub v_max: f64,
    pub n_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { v_max: 6.0, n_per_axis: 24 }
    }
}

/// How a function known at the nodes is evaluated at an off-grid velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    /// Trilinear in `f`; lattice neighbours outside the truncation count as zero.
    Direct,
    /// Trilinear in `f / mu` with clamped coordinates, times `mu(v)`. Nonnegative weights and
    /// exact on multiples of `mu`.
    Ratio,
    /// Like `Ratio`, but unclamped (edge cells extrapolate) and with a zero-mass, zero-momentum
    /// Laplacian correction that restores `|v|^2`. Exact on `span{1, v, |v|^2} mu`.
    Conservative,
}

pub const MAX_STENCIL: usize = 15;

/// Coefficients `c_k` with `f(v) ~ sum_k c_k f(v_k)`.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub len: usize,
    pub idx: [usize; MAX_STENCIL],
    pub coef: [f64; MAX_STENCIL],
}

impl Stencil {
    const EMPTY: Stencil = Stencil { len: 0, idx: [0; MAX_STENCIL], coef: [0.0; MAX_STENCIL] };

    #[inline]
    fn push(&mut self, idx: usize, coef: f64) {
        self.idx[self.len] = idx;
        self.coef[self.len] = coef;
        self.len += 1;
    }

    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        (0..self.len).map(|s| self.coef[s] * values[self.idx[s]]).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(|s| (self.idx[s], self.coef[s]))
    }
}

#[derive(Clone, Debug)]
pub struct VelocityGrid {
    spec: GridSpec,
    h: f64,
    axis: Vec<f64>,
    nodes: Vec<Vec3>,
    mu: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(spec: GridSpec) -> Result<Self, GridError> {
        let n = spec.n_per_axis;
        if n < 2 || !(spec.v_max > 0.0) {
            return Err(GridError::InvalidGrid { n, v_max: spec.v_max });
        }
        let h = 2.0 * spec.v_max / n as f64;
        let axis: Vec<f64> = (0..n).map(|i| ((2 * i + 1) as f64 - n as f64) * 0.5 * h).collect();
        let mut nodes = Vec::with_capacity(n * n * n);
        for &a in &axis {
            for &b in &axis {
                for &c in &axis {
                    nodes.push(Vec3::new(a, b, c));
                }
            }
        }
        let mu = nodes.iter().map(maxwellian).collect();
        Ok(Self { spec, h, axis, nodes, mu })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_per_axis(&self) -> usize {
        self.spec.n_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Quadrature weight `h^3` shared by every node.
    pub fn weight(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, k: usize) -> &Vec3 {
        &self.nodes[k]
    }

    /// `mu` at every node.
    pub fn maxwellian(&self) -> &[f64] {
        &self.mu
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.spec.n_per_axis;
        (i * n + j) * n + k
    }

    pub fn lattice(&self, idx: usize) -> [usize; 3] {
        let n = self.spec.n_per_axis;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Index of the node `-v_idx`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.spec.n_per_axis;
        let [i, j, k] = self.lattice(idx);
        self.index(n - 1 - i, n - 1 - j, n - 1 - k)
    }

    /// `1 - sum_k h^3 mu(v_k)`: mass lost to truncation and quadrature.
    pub fn mass_defect(&self) -> f64 {
        1.0 - self.integrate(&self.mu)
    }

    /// `sum_k h^3 f(v_k)`, adding mirror pairs first so odd functions integrate to exactly zero.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let (lo, hi) = values.split_at(n / 2);
        let paired: f64 = lo.iter().zip(hi.iter().rev()).map(|(a, b)| a + b).sum();
        let middle = if n % 2 == 1 { hi[0] } else { 0.0 };
        self.weight() * (paired + middle)
    }

    #[inline]
    fn lattice_coord(&self, x: f64) -> f64 {
        (x - self.axis[0]) / self.h
    }

    /// Coefficients acting on nodal values of `f`.
    pub fn stencil(&self, v: &Vec3, mode: Interp) -> Stencil {
        let mut st = self.raw_stencil(v, mode);
        if mode != Interp::Direct {
            let mu_v = maxwellian(v);
            for s in 0..st.len {
                st.coef[s] *= mu_v / self.mu[st.idx[s]];
            }
        }
        st
    }

    /// Coefficients acting on the interpolated quantity itself: `f` for `Direct`, `f / mu`
    /// otherwise.
    #[inline]
    pub fn raw_stencil(&self, v: &Vec3, mode: Interp) -> Stencil {
        match mode {
            Interp::Direct => self.direct_stencil(v),
            Interp::Ratio => self.ratio_stencil(v),
            Interp::Conservative => self.conservative_stencil(v),
        }
    }

    pub fn interpolate(&self, values: &[f64], v: &Vec3, mode: Interp) -> f64 {
        self.stencil(v, mode).apply(values)
    }

    fn direct_stencil(&self, v: &Vec3) -> Stencil {
        let n = self.spec.n_per_axis as isize;
        let mut st = Stencil::EMPTY;
        let mut base = [0isize; 3];
        let mut fr = [0.0; 3];
        for d in 0..3 {
            let g = self.lattice_coord(v[d]);
            if !(g > -1.0 && g < n as f64) {
                return st;
            }
            let f = g.floor();
            base[d] = f as isize;
            fr[d] = g - f;
        }
        for corner in 0..8 {
            let mut w = 1.0;
            let mut lat = [0usize; 3];
            let mut inside = true;
            for d in 0..3 {
                let up = (corner >> (2 - d)) & 1;
                let i = base[d] + up as isize;
                if i < 0 || i >= n {
                    inside = false;
                    break;
                }
                lat[d] = i as usize;
                w *= if up == 1 { fr[d] } else { 1.0 - fr[d] };
            }
            if inside && w != 0.0 {
                st.push(self.index(lat[0], lat[1], lat[2]), w);
            }
        }
        st
    }

    /// Base cell and fractional offsets; `clamp` pins the coordinate into the lattice.
    #[inline]
    fn cell_of(&self, v: &Vec3, clamp: bool) -> ([usize; 3], [f64; 3]) {
        let top = (self.spec.n_per_axis - 1) as f64;
        let mut base = [0usize; 3];
        let mut fr = [0.0; 3];
        for d in 0..3 {
            let mut g = self.lattice_coord(v[d]);
            if clamp {
                g = g.clamp(0.0, top);
            }
            let i = g.floor().clamp(0.0, top - 1.0);
            base[d] = i as usize;
            fr[d] = g - i;
        }
        (base, fr)
    }

    fn push_trilinear(&self, st: &mut Stencil, base: [usize; 3], fr: [f64; 3]) {
        for corner in 0..8 {
            let mut w = 1.0;
            let mut lat = [0usize; 3];
            for d in 0..3 {
                let up = (corner >> (2 - d)) & 1;
                lat[d] = base[d] + up;
                w *= if up == 1 { fr[d] } else { 1.0 - fr[d] };
            }
            let k = self.index(lat[0], lat[1], lat[2]);
            st.push(k, w);
        }
    }

    fn ratio_stencil(&self, v: &Vec3) -> Stencil {
        let (base, fr) = self.cell_of(v, true);
        let mut st = Stencil::EMPTY;
        self.push_trilinear(&mut st, base, fr);
        st
    }

    fn conservative_stencil(&self, v: &Vec3) -> Stencil {
        let n = self.spec.n_per_axis;
        let (base, fr) = self.cell_of(v, false);
        let mut st = Stencil::EMPTY;
        self.push_trilinear(&mut st, base, fr);
        // Trilinear interpolation overestimates |v|^2 by h^2 sum_d fr_d (1 - fr_d).
        let excess: f64 = fr.iter().map(|f| f * (1.0 - f)).sum();
        if excess != 0.0 && n >= 3 {
            let eps = -excess / 6.0;
            let mut c = [0usize; 3];
            for d in 0..3 {
                let g = self.lattice_coord(v[d]).round();
                c[d] = g.clamp(1.0, (n - 2) as f64) as usize;
            }
            st.push(self.index(c[0], c[1], c[2]), -6.0 * eps);
            for d in 0..3 {
                for up in [false, true] {
                    let mut l = c;
                    l[d] = if up { c[d] + 1 } else { c[d] - 1 };
                    st.push(self.index(l[0], l[1], l[2]), eps);
                }
            }
        }
        st
    }

    /// Gaussian moments of `mu` on the grid: mass, mean, second-moment matrix, energy `int |v|^2 mu`.
    pub fn gaussian_moments(&self) -> (f64, Vec3, nalgebra::Matrix3<f64>, f64) {
        let w = self.weight();
        let mut mass = 0.0;
        let mut mean = Vec3::zeros();
        let mut second = nalgebra::Matrix3::zeros();
        // Nodes k and N - 1 - k are mirror images; summing them in pairs makes odd moments
        // cancel exactly.
        let n = self.nodes.len();
        for k in 0..n.div_ceil(2) {
            let m = n - 1 - k;
            let pair = if m == k { [k].to_vec() } else { vec![k, m] };
            let mut pair_mean = Vec3::zeros();
            for &q in &pair {
                let (v, wm) = (&self.nodes[q], w * self.mu[q]);
                mass += wm;
                pair_mean += v * wm;
                second += v * v.transpose() * wm;
            }
            mean += pair_mean;
        }
        let energy = second.trace();
        (mass, mean, second, energy)
    }

    /// Largest `mu` value on the grid's outer shell, a proxy for the truncation tail.
    pub fn edge_maxwellian(&self) -> f64 {
        let r = self.spec.v_max - 0.5 * self.h;
        MU_PREFACTOR * (-0.5 * r * r).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> VelocityGrid {
        VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: n }).unwrap()
    }

    #[test]
    fn nodes_are_symmetric_under_negation() {
        let g = grid(7);
        for k in 0..g.len() {
            assert_eq!(*g.node(g.mirror(k)), -*g.node(k));
        }
    }

    #[test]
    fn odd_moments_vanish_exactly() {
        let (mass, mean, second, energy) = grid(16).gaussian_moments();
        assert_eq!(mean, Vec3::zeros());
        assert!((mass - 1.0).abs() < 1e-4);
        assert!((energy - 3.0).abs() < 1e-3);
        assert!(second[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let g = grid(8);
        let vals: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        for mode in [Interp::Direct, Interp::Ratio, Interp::Conservative] {
            for k in [0, 17, 200, 511] {
                assert_relative_eq!(g.interpolate(&vals, g.node(k), mode), vals[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ratio_mode_is_exact_on_maxwellian() {
        let g = grid(8);
        let v = Vec3::new(0.3, -4.9, 2.2);
        assert_relative_eq!(g.interpolate(g.maxwellian(), &v, Interp::Ratio), maxwellian(&v), max_relative = 1e-12);
        let far = Vec3::new(7.0, 0.0, 0.0);
        assert_relative_eq!(g.interpolate(g.maxwellian(), &far, Interp::Ratio), maxwellian(&far), max_relative = 1e-12);
    }

    #[test]
    fn conservative_mode_is_exact_on_collision_invariants() {
        let g = grid(9);
        let invariants: [fn(&Vec3) -> f64; 5] = [|_| 1.0, |v| v.x, |v| v.y, |v| v.z, |v| v.norm_squared()];
        for v in [Vec3::new(0.31, -1.7, 2.05), Vec3::new(4.8, 4.9, -5.3)] {
            for phi in invariants {
                let vals: Vec<f64> = g.nodes().iter().zip(g.maxwellian()).map(|(u, m)| phi(u) * m).collect();
                let got = g.interpolate(&vals, &v, Interp::Conservative);
                assert_relative_eq!(got, phi(&v) * maxwellian(&v), epsilon = 1e-14, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn direct_mode_drops_outside_neighbours() {
        let g = grid(8);
        let ones = vec![1.0; g.len()];
        assert_eq!(g.interpolate(&ones, &Vec3::new(9.0, 0.0, 0.0), Interp::Direct), 0.0);
        let edge = g.interpolate(&ones, &Vec3::new(5.0, 0.0, 0.0), Interp::Direct);
        assert!(edge > 0.0 && edge < 1.0);
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(VelocityGrid::new(GridSpec { v_max: 1.0, n_per_axis: 1 }).is_err());
        assert!(VelocityGrid::new(GridSpec { v_max: 0.0, n_per_axis: 4 }).is_err());
    }
}
