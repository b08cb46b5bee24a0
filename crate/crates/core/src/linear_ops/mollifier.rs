//! The cut-off `Theta_delta` and the splitting of the compact part into a velocity-compact
//! piece `A` and a remainder `B2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::CollisionModel;
use crate::gas_state::{Interp, VelocityGrid, Weight};

use super::LinearOpsError;

/// Quintic smoothstep: `0` for `t <= 0`, `1` for `t >= 1`, `C^2` in between.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Ramp equal to one below `a` and zero above `b`.
fn down(x: f64, a: f64, b: f64) -> f64 {
    1.0 - smoothstep((x - a) / (b - a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub delta: f64,
}

impl MollifierSpec {
    pub fn new(delta: f64) -> Result<Self, LinearOpsError> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(LinearOpsError::OutOfRange { name: "delta", value: delta, range: "(0, 1/2)" });
        }
        Ok(Self { delta })
    }

    /// `Theta_delta` as a function of `|v|`, `|v - v*|` and the scattering cosine.
    pub fn theta(&self, speed: f64, relative_speed: f64, cos_theta: f64) -> f64 {
        let d = self.delta;
        down(speed, 1.0 / d, 2.0 / d)
            * smoothstep((relative_speed - d) / d)
            * down(relative_speed, 1.0 / d, 2.0 / d)
            * down(cos_theta.abs(), 1.0 - 2.0 * d, 1.0 - d)
    }
}

/// `(A f, B2 f)` at the listed nodes. Both parts include the loss `mu q(f)` under the same cut-off
/// so that `A f + B2 f - nu f = L f`.
pub fn split_ab(
    model: &CollisionModel,
    grid: &VelocityGrid,
    mollifier: &MollifierSpec,
    f: &[f64],
    mode: Interp,
    nodes: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let theta = |s: f64, r: f64, c: f64| mollifier.theta(s, r, c);
    nodes
        .par_iter()
        .map(|&i| {
            let (a, b) = model.compact_row(grid, mode, i, Some(&theta));
            let dot = |row: &[f64]| row.iter().zip(f).map(|(x, y)| x * y).sum::<f64>();
            (dot(&a), dot(&b))
        })
        .unzip()
}

/// Row-sum proxy of `|| B2 ||` from `L^inf(m)` to `L^inf(m / nu)`, maximized over `nodes`.
pub fn b2_norm_proxy(
    model: &CollisionModel,
    grid: &VelocityGrid,
    mollifier: &MollifierSpec,
    weight: &Weight,
    mode: Interp,
    nodes: &[usize],
) -> f64 {
    let theta = |s: f64, r: f64, c: f64| mollifier.theta(s, r, c);
    let m: Vec<f64> = grid.nodes().iter().map(|v| weight.value(v.norm())).collect();
    let nu = model.frequency_on_grid(grid);
    nodes
        .par_iter()
        .map(|&i| {
            let (_, b) = model.compact_row(grid, mode, i, Some(&theta));
            m[i] / nu[i] * b.iter().zip(&m).map(|(x, mj)| x.abs() / mj).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::GridSpec;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn theta_respects_its_sets(delta in 0.01f64..0.3, s in 0.0f64..250.0, r in 0.0f64..250.0, c in -1.0f64..1.0) {
            let m = MollifierSpec::new(delta).unwrap();
            let t = m.theta(s, r, c);
            prop_assert!((0.0..=1.0).contains(&t));
            let inner = s <= 1.0 / delta && (2.0 * delta..=1.0 / delta).contains(&r) && c.abs() <= 1.0 - 2.0 * delta;
            let support = s <= 2.0 / delta && (delta..=2.0 / delta).contains(&r) && c.abs() <= 1.0 - delta;
            if inner { prop_assert_eq!(t, 1.0); }
            if !support { prop_assert_eq!(t, 0.0); }
        }
    }

    fn setup() -> (CollisionModel, VelocityGrid, Vec<f64>) {
        let m = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(6, 6)).unwrap();
        let g = VelocityGrid::new(GridSpec { v_max: 4.5, n_per_axis: 8 }).unwrap();
        let f = g.nodes().iter().map(|v| (-(v - crate::Vec3::new(0.3, 0.0, -0.2)).norm_squared()).exp()).collect();
        (m, g, f)
    }

    #[test]
    fn split_reassembles_linearized_operator() {
        let (m, g, f) = setup();
        let nodes = [0, 37, 200, 300, 511];
        let (a, b) = split_ab(&m, &g, &MollifierSpec::new(0.3).unwrap(), &f, Interp::Ratio, &nodes);
        let nu = m.frequency_on_grid(&g);
        let l = m.linearized(&g, &f, Interp::Ratio);
        for (p, &i) in nodes.iter().enumerate() {
            let tol = crate::collision::equilibrium_tolerance(nu[i], 8) * 1e-6;
            assert!((a[p] + b[p] - nu[i] * f[i] - l[i]).abs() < tol);
        }
    }

    #[test]
    fn split_of_zero_is_zero() {
        let (m, g, _) = setup();
        let zero = vec![0.0; g.len()];
        let (a, b) = split_ab(&m, &g, &MollifierSpec::new(0.1).unwrap(), &zero, Interp::Direct, &[3, 99]);
        assert!(a.iter().chain(&b).all(|x| *x == 0.0));
    }

    #[test]
    fn small_delta_moves_everything_into_a() {
        let (m, g, f) = setup();
        let nodes = [10, 250];
        let (a, b) = split_ab(&m, &g, &MollifierSpec::new(1e-3).unwrap(), &f, Interp::Ratio, &nodes);
        let k = m.k_apply_at(&g, &f, Interp::Ratio, &nodes);
        for p in 0..nodes.len() {
            assert!((a[p] - k[p]).abs() < 1e-12 * k[p].abs().max(1e-12));
            assert_eq!(b[p], 0.0);
        }
    }
}
