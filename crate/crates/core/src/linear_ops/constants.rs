//! Closed-form and quadrature constants: the accommodation threshold, the moment roots of the
//! hydrodynamic test functions, `k_inf`, and the limit of the `B2` bound for polynomial weights.

use std::f64::consts::PI;

use serde::Serialize;

use crate::collision::CollisionModel;
use crate::gas_state::{Interp, VelocityGrid, Weight};
use crate::quadrature::{bisect, integrate};

use super::LinearOpsError;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NamedConstants {
    /// `3 (1 - alpha)(1 + alpha)`, the limit of `C_alpha(zeta)` as `zeta -> 1`.
    pub c_alpha_zeta_limit: f64,
    /// Whether `c_alpha_zeta_limit < 1`, i.e. `alpha > sqrt(2/3)`.
    pub alpha_admissible: bool,
    pub k_inf: f64,
    pub alpha_a: f64,
    pub alpha_c: f64,
    /// `(4 / (k - 1 - gamma)) (4 pi b_inf / l_b)` for a polynomial weight of exponent `k`.
    pub c_b_poly_limit: Option<f64>,
}

/// Radial quadrature of `int g(|v|^2) v_1^2 mu dv`, using that `v_1^2` averages to `|v|^2 / 3`
/// over spheres.
fn radial_moment<G: Fn(f64) -> f64>(g: G) -> f64 {
    let norm = 4.0 * PI / (2.0 * PI).powf(1.5);
    norm * integrate(|r| g(r * r) * r * r / 3.0 * r * r * (-0.5 * r * r).exp(), 0.0, 40.0, 24, 40)
}

/// Root in `a` of `int (|v|^2 - a) p(|v|^2) v_1^2 mu dv = 0`.
pub fn moment_root<P: Fn(f64) -> f64>(p: P) -> f64 {
    let with = radial_moment(|s| s * p(s));
    let plain = radial_moment(&p);
    bisect(|a| with - a * plain, 0.0, 100.0, 1e-13)
}

pub fn named_constants(model: &CollisionModel, alpha: f64, zeta: f64, weight: &Weight) -> Result<NamedConstants, LinearOpsError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LinearOpsError::OutOfRange { name: "alpha", value: alpha, range: "[0, 1]" });
    }
    if !(zeta > 0.5 && zeta <= 1.0) {
        return Err(LinearOpsError::OutOfRange { name: "zeta", value: zeta, range: "(1/2, 1]" });
    }
    let c_alpha_zeta_limit = 3.0 * (1.0 - alpha) * (1.0 + alpha);
    let c_b_poly_limit = match *weight {
        Weight::Polynomial { k } => {
            let excess = k - 1.0 - model.gamma();
            if excess <= 0.0 {
                return Err(LinearOpsError::OutOfRange { name: "k", value: k, range: "(1 + gamma, inf)" });
            }
            Some(4.0 / excess * (4.0 * PI * model.b_inf() / model.l_b()))
        }
        _ => None,
    };
    Ok(NamedConstants {
        c_alpha_zeta_limit,
        alpha_admissible: c_alpha_zeta_limit < 1.0,
        k_inf: model.k_inf(),
        alpha_a: moment_root(|s| 0.5 * (s - 3.0)),
        alpha_c: moment_root(|_| 1.0),
        c_b_poly_limit,
    })
}

/// `max |K(mu^zeta)| mu^{-zeta} / nu` over `nodes`: the probe of the near-`3 nu` bound on `K`
/// in the `mu^{-zeta}` weighted norm.
pub fn k_weighted_ratio(model: &CollisionModel, grid: &VelocityGrid, zeta: f64, nodes: &[usize]) -> f64 {
    let mu = grid.maxwellian();
    let f: Vec<f64> = mu.iter().map(|m| m.powf(zeta)).collect();
    let k = model.k_apply_at(grid, &f, Interp::Direct, nodes);
    let nu = model.frequency_on_grid(grid);
    nodes.iter().zip(&k).map(|(&i, ki)| ki.abs() / f[i] / nu[i]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::CollisionSpec;
    use crate::gas_state::GridSpec;

    #[test]
    fn moment_roots_are_ten_and_five() {
        let c = named_constants(&CollisionModel::hard_spheres(), 0.9, 0.99, &Weight::Polynomial { k: 7.0 }).unwrap();
        assert!((c.alpha_a - 10.0).abs() < 1e-6, "{}", c.alpha_a);
        assert!((c.alpha_c - 5.0).abs() < 1e-6, "{}", c.alpha_c);
        assert!((c.k_inf - 6.0).abs() < 1e-10);
        assert!((c.c_b_poly_limit.unwrap() - 4.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_sits_at_root_two_thirds() {
        let m = CollisionModel::hard_spheres();
        let w = Weight::MaxwellianPower { zeta: 0.9 };
        let at = named_constants(&m, (2.0f64 / 3.0).sqrt(), 0.9, &w).unwrap();
        assert!((at.c_alpha_zeta_limit - 1.0).abs() < 1e-12);
        assert!(named_constants(&m, 0.82, 0.9, &w).unwrap().alpha_admissible);
        assert!(!named_constants(&m, 0.81, 0.9, &w).unwrap().alpha_admissible);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let m = CollisionModel::hard_spheres();
        let w = Weight::Polynomial { k: 7.0 };
        assert!(named_constants(&m, 2.0, 0.9, &w).is_err());
        assert!(named_constants(&m, 0.9, 0.3, &w).is_err());
        assert!(named_constants(&m, 0.9, 0.9, &Weight::Polynomial { k: 1.5 }).is_err());
    }

    #[test]
    fn compact_part_stays_near_three_nu_in_heavy_weight() {
        let m = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(8, 8)).unwrap();
        let g = VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: 12 }).unwrap();
        let nodes: Vec<usize> = (0..g.len()).filter(|&k| g.node(k).norm() <= 3.5).collect();
        let r = k_weighted_ratio(&m, &g, 0.99, &nodes);
        assert!(r <= 3.5, "{r}");
    }
}
