//! Hard-potential kernel `B = C_Phi |v - v*|^gamma b(cos theta)` with angular cut-off.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas_state::maxwellian_speed;
use crate::geometry::tangent_frame;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error("sigma is not a unit vector (|sigma| = {0})")]
    NonUnitSigma(f64),
    #[error("gamma = {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("c_phi must be positive, got {0}")]
    NonPositiveConstant(f64),
    #[error("unknown angular kernel {0:?}; expected \"constant\" or \"cosine_power(p)\"")]
    UnknownAngular(String),
    #[error("sphere quadrature needs n_theta >= 2 and an even n_phi >= 2")]
    BadQuadrature,
}

/// Angular factor `b(cos theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angular {
    /// `b = 1`.
    Constant,
    /// `b = (1 + |cos theta|^p) / 2`: even in `cos theta`, positive and bounded by 1.
    CosinePower(f64),
}

impl Angular {
    #[inline]
    pub fn eval(&self, c: f64) -> f64 {
        match *self {
            Angular::Constant => 1.0,
            Angular::CosinePower(p) => 0.5 * (1.0 + c.abs().powf(p)),
        }
    }
}

impl fmt::Display for Angular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angular::Constant => write!(f, "constant"),
            Angular::CosinePower(p) => write!(f, "cosine_power({p})"),
        }
    }
}

impl FromStr for Angular {
    type Err = CollisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "constant" {
            return Ok(Angular::Constant);
        }
        t.strip_prefix("cosine_power(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|p| p.trim().parse::<f64>().ok())
            .filter(|p| p.is_finite() && *p >= 0.0)
            .map(Angular::CosinePower)
            .ok_or_else(|| CollisionError::UnknownAngular(s.to_string()))
    }
}

impl Serialize for Angular {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angular {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_n_theta() -> usize {
    16
}

fn default_n_phi() -> usize {
    16
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSpec {
    pub gamma: f64,
    pub c_phi: f64,
    pub angular: Angular,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
}

impl CollisionSpec {
    pub fn hard_spheres() -> Self {
        Self { gamma: 1.0, c_phi: 1.0, angular: Angular::Constant, n_theta: 16, n_phi: 16 }
    }

    pub fn with_quadrature(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.n_theta = n_theta;
        self.n_phi = n_phi;
        self
    }
}

impl Default for CollisionSpec {
    fn default() -> Self {
        Self::hard_spheres()
    }
}

/// `k_inf = 1 + gamma + 16 pi b_inf / l_b`: the smallest admissible polynomial weight exponent.
pub fn k_inf_from(gamma: f64, b_inf: f64, l_b: f64) -> f64 {
    1.0 + gamma + 16.0 * PI * b_inf / l_b
}

/// Product rule on the sphere about an axis `k`: Gauss in `cos theta`, uniform azimuth.
/// Weights carry `b(cos theta)` and are rescaled to sum to `l_b` exactly. The node set is
/// closed under `sigma -> -sigma` when `n_phi` is even.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    /// (cos theta, sin theta, cos phi, sin phi, weight).
    pub nodes: Vec<[f64; 5]>,
}

impl SphereQuadrature {
    pub fn new(angular: Angular, n_theta: usize, n_phi: usize, l_b: f64) -> Result<Self, CollisionError> {
        if n_theta < 2 || n_phi < 2 || n_phi % 2 == 1 {
            return Err(CollisionError::BadQuadrature);
        }
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (c, wc) in gauss_legendre(n_theta, -1.0, 1.0) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push([c, s, phi.cos(), phi.sin(), wc * dphi * angular.eval(c)]);
            }
        }
        let total: f64 = nodes.iter().map(|n| n[4]).sum();
        for n in &mut nodes {
            n[4] *= l_b / total;
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n[4]).sum()
    }
}

#[derive(Clone, Debug)]
pub struct CollisionModel {
    spec: CollisionSpec,
    b_inf: f64,
    l_b: f64,
    sphere: SphereQuadrature,
}

impl CollisionModel {
    pub fn new(spec: CollisionSpec) -> Result<Self, CollisionError> {
        if !(0.0..=1.0).contains(&spec.gamma) {
            return Err(CollisionError::GammaOutOfRange(spec.gamma));
        }
        if !(spec.c_phi > 0.0) {
            return Err(CollisionError::NonPositiveConstant(spec.c_phi));
        }
        let l_b = angular_mass(spec.angular);
        let b_inf = (0..=2000).map(|i| spec.angular.eval(-1.0 + i as f64 * 1e-3)).fold(0.0, f64::max);
        let sphere = SphereQuadrature::new(spec.angular, spec.n_theta, spec.n_phi, l_b)?;
        Ok(Self { spec, b_inf, l_b, sphere })
    }

    pub fn hard_spheres() -> Self {
        Self::new(CollisionSpec::hard_spheres()).expect("hard-sphere parameters are valid")
    }

    /// Same kernel with a different sphere rule.
    pub fn with_quadrature(&self, n_theta: usize, n_phi: usize) -> Result<Self, CollisionError> {
        Self::new(self.spec.with_quadrature(n_theta, n_phi))
    }

    pub fn spec(&self) -> CollisionSpec {
        self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    pub fn c_phi(&self) -> f64 {
        self.spec.c_phi
    }

    pub fn angular(&self) -> Angular {
        self.spec.angular
    }

    pub fn b_inf(&self) -> f64 {
        self.b_inf
    }

    /// `l_b = int_{S^2} b(cos theta) d sigma`.
    pub fn l_b(&self) -> f64 {
        self.l_b
    }

    pub fn k_inf(&self) -> f64 {
        k_inf_from(self.spec.gamma, self.b_inf, self.l_b)
    }

    pub fn sphere(&self) -> &SphereQuadrature {
        &self.sphere
    }

    /// `Phi(r) = C_Phi r^gamma`.
    #[inline]
    pub fn kinetic(&self, r: f64) -> f64 {
        if self.spec.gamma == 0.0 {
            self.spec.c_phi
        } else {
            self.spec.c_phi * r.powf(self.spec.gamma)
        }
    }

    /// Collision frequency `nu(|v|) = C_Phi l_b int |v - v*|^gamma mu(v*) dv*` by radial
    /// quadrature; the angular integral of `|v - v*|^gamma` is closed form.
    pub fn frequency(&self, speed: f64) -> f64 {
        let g = self.spec.gamma;
        let r = speed.abs();
        let shell = |rho: f64| -> f64 {
            let angular = if r < 1e-12 || rho < 1e-12 {
                2.0 * (r + rho).powf(g)
            } else {
                ((r + rho).powf(g + 2.0) - (r - rho).abs().powf(g + 2.0)) / ((g + 2.0) * r * rho)
            };
            2.0 * PI * rho * rho * maxwellian_speed(rho) * angular
        };
        let upper = 14.0;
        let integral: f64 = if r > 0.0 && r < upper {
            composite_gauss_legendre(12, 16, 0.0, r)
                .into_iter()
                .chain(composite_gauss_legendre(12, 32, r, upper))
                .map(|(x, w)| w * shell(x))
                .sum()
        } else {
            composite_gauss_legendre(12, 48, 0.0, upper).into_iter().map(|(x, w)| w * shell(x)).sum()
        };
        self.spec.c_phi * self.l_b * integral
    }
}

/// `nu(|v|)` tabulated on a uniform speed lattice and interpolated linearly; speeds beyond the
/// table fall back to direct quadrature.
#[derive(Clone, Debug)]
pub struct FrequencyTable {
    step: f64,
    values: Vec<f64>,
    model: CollisionModel,
}

impl FrequencyTable {
    pub fn new(model: &CollisionModel, max_speed: f64, intervals: usize) -> Self {
        let step = max_speed / intervals as f64;
        let values = (0..=intervals).map(|k| model.frequency(k as f64 * step)).collect();
        Self { step, values, model: model.clone() }
    }

    /// Table on `[0, 16]` with spacing `1/400`.
    pub fn standard(model: &CollisionModel) -> Self {
        Self::new(model, 16.0, 6400)
    }

    #[inline]
    pub fn eval(&self, speed: f64) -> f64 {
        let s = speed / self.step;
        let k = s as usize;
        if k + 1 >= self.values.len() {
            return self.model.frequency(speed);
        }
        let fr = s - k as f64;
        self.values[k] * (1.0 - fr) + self.values[k + 1] * fr
    }
}

/// `l_b = 2 pi int_{-1}^{1} b(c) dc`, split at `c = 0` where `|c|^p` has a kink.
pub fn angular_mass(angular: Angular) -> f64 {
    let half =
        |a: f64, b: f64| -> f64 { composite_gauss_legendre(16, 64, a, b).into_iter().map(|(c, w)| w * angular.eval(c)).sum() };
    2.0 * PI * (half(-1.0, 0.0) + half(0.0, 1.0))
}

/// `v' = (v + v*)/2 + |v - v*| sigma / 2`, `v'* = (v + v*)/2 - |v - v*| sigma / 2`.
pub fn post_collision(v: &Vec3, v_star: &Vec3, sigma: &Vec3) -> Result<(Vec3, Vec3), CollisionError> {
    let len = sigma.norm();
    if (len - 1.0).abs() > 1e-12 {
        return Err(CollisionError::NonUnitSigma(len));
    }
    let center = (v + v_star) * 0.5;
    let half = 0.5 * (v - v_star).norm();
    Ok((center + sigma * half, center - sigma * half))
}

/// Orthonormal frame `(k, e1, e2)` with `k` along the relative velocity.
#[inline]
pub(crate) fn relative_frame(rel: &Vec3, r: f64) -> (Vec3, Vec3, Vec3) {
    let k = if r > 0.0 { rel / r } else { Vec3::z() };
    let (e1, e2) = tangent_frame(&k);
    (k, e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn post_collision_examples() {
        let w = Vec3::new(0.3, -1.0, 2.0);
        let (a, b) = post_collision(&w, &w, &Vec3::y()).unwrap();
        assert_eq!((a, b), (w, w));
        let (a, b) = post_collision(&Vec3::x(), &-Vec3::x(), &Vec3::x()).unwrap();
        assert_eq!((a, b), (Vec3::x(), -Vec3::x()));
        let (a, b) = post_collision(&Vec3::x(), &-Vec3::x(), &Vec3::y()).unwrap();
        assert_eq!((a, b), (Vec3::y(), -Vec3::y()));
        assert!(post_collision(&w, &w, &Vec3::new(0.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn hard_sphere_constants() {
        let m = CollisionModel::hard_spheres();
        assert!((m.l_b() - 4.0 * PI).abs() < 1e-10);
        assert_eq!(m.b_inf(), 1.0);
        assert!((m.k_inf() - 6.0).abs() < 1e-10);
        assert!((m.sphere().total_weight() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn hard_sphere_frequency_at_rest() {
        let m = CollisionModel::hard_spheres();
        assert_relative_eq!(m.frequency(0.0), 4.0 * PI * (8.0 / PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn maxwell_molecules_have_constant_frequency() {
        let m = CollisionModel::new(CollisionSpec { gamma: 0.0, ..CollisionSpec::hard_spheres() }).unwrap();
        for r in [0.0, 0.7, 3.0] {
            assert_relative_eq!(m.frequency(r), m.l_b(), max_relative = 1e-10);
        }
    }

    #[test]
    fn frequency_is_increasing_for_hard_spheres() {
        let m = CollisionModel::hard_spheres();
        let vals: Vec<f64> = (0..20).map(|i| m.frequency(i as f64 * 0.4)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn angular_parsing_round_trips() {
        for a in [Angular::Constant, Angular::CosinePower(2.5)] {
            assert_eq!(a.to_string().parse::<Angular>().unwrap(), a);
        }
        assert!("gaussian".parse::<Angular>().is_err());
        let m =
            CollisionModel::new(CollisionSpec { angular: Angular::CosinePower(2.0), ..CollisionSpec::hard_spheres() }).unwrap();
        // (1 + c^2)/2 integrates to 2 pi (1 + 1/3).
        assert_relative_eq!(m.l_b(), 2.0 * PI * (4.0 / 3.0), max_relative = 1e-12);
    }
}
