//! Smooth bounded domains given by a level function `phi` with `Omega = {phi < 0}`.
//!
//! Exit times are found by fixed-step ray marching (step at most `bounding_radius / 64`)
//! followed by a bracketed root polish, so thin re-entries of non-convex shapes are not
//! skipped. Ball and ellipsoid also expose closed-form chord lengths used as oracles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

/// Relative width of the grazing band: `|n·v| <= GRAZING_TOL * |v|`.
pub const GRAZING_TOL: f64 = 1e-9;
/// Marching step as a fraction of the bounding radius.
pub const MARCH_FRACTION: f64 = 1.0 / 64.0;
/// Relative accuracy of the polished exit time.
pub const EXIT_TIME_RTOL: f64 = 1e-12;
/// Probe length for the inflection-grazing test, relative to the bounding radius.
pub const INFLECTION_PROBE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point is not on the boundary (|phi| = {0:.3e})")]
    NotOnBoundary(f64),
    #[error("level-function gradient degenerates at the boundary point")]
    DegenerateGradient,
    #[error("zero velocity has no characteristic")]
    ZeroVelocity,
    #[error("backward ray never left the domain within 4 bounding radii")]
    NoExit,
    #[error("point lies outside the closed domain (phi = {0:.3e})")]
    OutsideDomain(f64),
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
}

/// Smooth scalar field defining a custom domain.
pub trait LevelFunction: Send + Sync + fmt::Debug {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    /// Radius of a ball centred at the origin that contains the domain.
    fn bounding_radius(&self) -> f64;
}

/// Serializable shape description (config key `shape`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeSpec {
    Ball {
        radius: f64,
    },
    Ellipsoid {
        semi_axes: [f64; 3],
    },
    /// `(|x/a|^p + |y/b|^p + |z/c|^p)^(1/p) < 1`; convex, not strictly convex for `p > 2`.
    Superquadric {
        semi_axes: [f64; 3],
        exponent: f64,
    },
    /// Cassini surface of revolution about the x-axis; non-convex waist when
    /// `focus < size < focus * sqrt(2)`.
    Peanut {
        focus: f64,
        size: f64,
    },
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Ball { radius: 1.0 }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Ball(f64),
    Ellipsoid(Vec3),
    Implicit(Arc<dyn LevelFunction>),
}

#[derive(Clone, Debug)]
pub struct Superquadric {
    pub semi_axes: Vec3,
    pub exponent: f64,
}

impl LevelFunction for Superquadric {
    fn value(&self, x: &Vec3) -> f64 {
        let p = self.exponent;
        let s: f64 = (0..3).map(|i| (x[i] / self.semi_axes[i]).abs().powf(p)).sum();
        self.semi_axes.min() * (s.powf(1.0 / p) - 1.0)
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let p = self.exponent;
        let s: f64 = (0..3).map(|i| (x[i] / self.semi_axes[i]).abs().powf(p)).sum();
        if s == 0.0 {
            return Vec3::zeros();
        }
        let rho = s.powf(1.0 / p);
        let scale = self.semi_axes.min() * rho.powf(1.0 - p);
        Vec3::from_fn(|i, _| {
            let a = self.semi_axes[i];
            let u = x[i] / a;
            scale * u.abs().powf(p - 1.0) * u.signum() / a
        })
    }

    fn bounding_radius(&self) -> f64 {
        // The superquadric sits inside its bounding box.
        self.semi_axes.norm()
    }
}

#[derive(Clone, Debug)]
pub struct Peanut {
    pub focus: f64,
    pub size: f64,
}

impl Peanut {
    fn product(&self, x: &Vec3) -> f64 {
        let r2 = x.y * x.y + x.z * x.z;
        let c = self.focus;
        ((x.x - c).powi(2) + r2) * ((x.x + c).powi(2) + r2)
    }
}

impl LevelFunction for Peanut {
    fn value(&self, x: &Vec3) -> f64 {
        self.product(x).sqrt().sqrt() - self.size
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let r2 = x.y * x.y + x.z * x.z;
        let c = self.focus;
        let a = (x.x - c).powi(2) + r2;
        let b = (x.x + c).powi(2) + r2;
        let p = a * b;
        if p == 0.0 {
            return Vec3::zeros();
        }
        let grad_p = Vec3::new(2.0 * (x.x - c) * b + 2.0 * (x.x + c) * a, 2.0 * x.y * (a + b), 2.0 * x.z * (a + b));
        grad_p * (0.25 * p.powf(-0.75))
    }

    fn bounding_radius(&self) -> f64 {
        (self.focus * self.focus + self.size * self.size).sqrt()
    }
}

/// Domain `Omega = {phi < 0}` with its numerical tolerances. Immutable and cheap to clone.
#[derive(Clone, Debug)]
pub struct Domain {
    shape: Shape,
    spec: Option<ShapeSpec>,
    bounding_radius: f64,
    surface_tolerance: f64,
}

/// Result of a backward exit-time query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitHit {
    pub time: f64,
    pub footprint: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    Outgoing,
    Ingoing,
    Grazing,
    InwardInflectionGrazing,
}

impl BoundaryClass {
    pub fn is_grazing(self) -> bool {
        matches!(self, BoundaryClass::Grazing | BoundaryClass::InwardInflectionGrazing)
    }
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Self::from_spec(&ShapeSpec::Ball { radius }).expect("positive radius")
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self::from_spec(&ShapeSpec::Ellipsoid { semi_axes: [a, b, c] }).expect("positive axes")
    }

    pub fn from_spec(spec: &ShapeSpec) -> Result<Self, GeometryError> {
        let positive = |xs: &[f64]| xs.iter().all(|&x| x.is_finite() && x > 0.0);
        let (shape, radius) = match spec {
            ShapeSpec::Ball { radius } => {
                if !positive(&[*radius]) {
                    return Err(GeometryError::InvalidShape(format!("radius {radius}")));
                }
                (Shape::Ball(*radius), *radius)
            }
            ShapeSpec::Ellipsoid { semi_axes } => {
                if !positive(semi_axes) {
                    return Err(GeometryError::InvalidShape(format!("semi-axes {semi_axes:?}")));
                }
                let axes = Vec3::from(*semi_axes);
                (Shape::Ellipsoid(axes), axes.max())
            }
            ShapeSpec::Superquadric { semi_axes, exponent } => {
                if !positive(semi_axes) || !(*exponent >= 2.0) {
                    return Err(GeometryError::InvalidShape(format!(
                        "superquadric needs positive axes and exponent >= 2, got {semi_axes:?}, {exponent}"
                    )));
                }
                let sq = Superquadric { semi_axes: Vec3::from(*semi_axes), exponent: *exponent };
                let r = sq.bounding_radius();
                (Shape::Implicit(Arc::new(sq)), r)
            }
            ShapeSpec::Peanut { focus, size } => {
                if !positive(&[*focus, *size]) || size <= focus {
                    return Err(GeometryError::InvalidShape(format!(
                        "peanut needs size > focus > 0, got focus {focus}, size {size}"
                    )));
                }
                let p = Peanut { focus: *focus, size: *size };
                let r = p.bounding_radius();
                (Shape::Implicit(Arc::new(p)), r)
            }
        };
        Ok(Self { shape, spec: Some(spec.clone()), bounding_radius: radius, surface_tolerance: 1e-9 })
    }

    /// Domain from a user-supplied level function.
    pub fn implicit(level: Arc<dyn LevelFunction>) -> Self {
        let r = level.bounding_radius();
        Self { shape: Shape::Implicit(level), spec: None, bounding_radius: r, surface_tolerance: 1e-9 }
    }

    pub fn with_surface_tolerance(mut self, tol: f64) -> Self {
        self.surface_tolerance = tol;
        self
    }

    pub fn spec(&self) -> Option<&ShapeSpec> {
        self.spec.as_ref()
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn surface_tolerance(&self) -> f64 {
        self.surface_tolerance
    }

    /// Absolute boundary band half-width.
    pub fn boundary_band(&self) -> f64 {
        self.surface_tolerance * self.bounding_radius
    }

    pub fn is_convex(&self) -> bool {
        match &self.spec {
            Some(ShapeSpec::Peanut { focus, size }) => *size >= focus * std::f64::consts::SQRT_2,
            Some(_) => true,
            None => false,
        }
    }

    pub fn level(&self, x: &Vec3) -> f64 {
        match &self.shape {
            Shape::Ball(r) => x.norm() - r,
            Shape::Ellipsoid(a) => {
                let rho = x.component_div(a).norm();
                a.min() * (rho - 1.0)
            }
            Shape::Implicit(f) => f.value(x),
        }
    }

    pub fn level_gradient(&self, x: &Vec3) -> Vec3 {
        match &self.shape {
            Shape::Ball(_) => {
                let r = x.norm();
                if r == 0.0 {
                    Vec3::zeros()
                } else {
                    x / r
                }
            }
            Shape::Ellipsoid(a) => {
                let u = x.component_div(a);
                let rho = u.norm();
                if rho == 0.0 {
                    return Vec3::zeros();
                }
                u.component_div(a) * (a.min() / rho)
            }
            Shape::Implicit(f) => f.gradient(x),
        }
    }

    /// Closed-domain membership within the surface band.
    pub fn contains(&self, x: &Vec3) -> bool {
        self.level(x) <= self.boundary_band()
    }

    pub fn is_interior(&self, x: &Vec3) -> bool {
        self.level(x) < -self.boundary_band()
    }

    pub fn on_boundary(&self, x: &Vec3) -> bool {
        self.level(x).abs() <= self.boundary_band()
    }

    pub fn outward_normal(&self, x: &Vec3) -> Result<Vec3, GeometryError> {
        let phi = self.level(x);
        if phi.abs() > self.boundary_band() {
            return Err(GeometryError::NotOnBoundary(phi.abs()));
        }
        self.normal_unchecked(x)
    }

    /// `grad phi / |grad phi|` without the on-boundary check (used at polished footprints).
    pub fn normal_unchecked(&self, x: &Vec3) -> Result<Vec3, GeometryError> {
        let g = self.level_gradient(x);
        let norm = g.norm();
        if !(norm > 1e3 * f64::EPSILON) {
            return Err(GeometryError::DegenerateGradient);
        }
        Ok(g / norm)
    }

    /// Backward exit time `t_min(x, v)` and footprint `x - t_min v`.
    pub fn backward_exit_time(&self, x: &Vec3, v: &Vec3) -> Result<ExitHit, GeometryError> {
        let horizon = 4.0 * self.bounding_radius / v.norm();
        match self.exit_within(x, v, horizon)? {
            Some(hit) => Ok(hit),
            None => Err(GeometryError::NoExit),
        }
    }

    /// Backward exit restricted to `[0, cap]`: `None` when the segment `x - s v`, `s <= cap`,
    /// stays in the closed domain at every marching sample.
    pub fn exit_within(&self, x: &Vec3, v: &Vec3, cap: f64) -> Result<Option<ExitHit>, GeometryError> {
        let speed = v.norm();
        if !(speed > 0.0) {
            return Err(GeometryError::ZeroVelocity);
        }
        let phi0 = self.level(x);
        let band = self.boundary_band();
        if phi0 > band {
            return Err(GeometryError::OutsideDomain(phi0));
        }
        if cap <= 0.0 {
            return Ok(None);
        }
        // On the boundary with an ingoing velocity the backward ray leaves at once.
        if phi0.abs() <= band {
            if let Ok(n) = self.normal_unchecked(x) {
                if n.dot(v) < -GRAZING_TOL * speed {
                    return Ok(Some(ExitHit { time: 0.0, footprint: *x }));
                }
            }
        }
        let step = MARCH_FRACTION * self.bounding_radius / speed;
        let phi_at = |s: f64| self.level(&(x - v * s));
        let mut lo = 0.0;
        loop {
            let hi = (lo + step).min(cap);
            let phi_hi = phi_at(hi);
            if phi_hi > 0.0 {
                let t = self.polish(&phi_at, lo, hi, phi_hi, step);
                let footprint = x - v * t;
                return Ok(Some(ExitHit { time: t, footprint }));
            }
            if hi >= cap {
                return Ok(None);
            }
            lo = hi;
        }
    }

    /// Bracketed Illinois iteration on `phi(x - s v)` between an inside and an outside sample.
    fn polish<F: Fn(f64) -> f64>(&self, phi_at: &F, lo: f64, hi: f64, phi_hi: f64, step: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let mut fa = phi_at(a).min(0.0);
        let mut fb = phi_hi;
        let mut side = 0i8;
        let scale = step.max(hi);
        for _ in 0..100 {
            if b - a <= EXIT_TIME_RTOL * scale {
                break;
            }
            let mut c = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let fc = phi_at(c);
            if fc > 0.0 {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
                if fc == 0.0 {
                    return c;
                }
            }
        }
        // `a` is the last sample inside the closed domain; snap exits below resolution to zero.
        if a <= EXIT_TIME_RTOL * scale {
            0.0
        } else {
            a
        }
    }

    pub fn classify_boundary(&self, x: &Vec3, v: &Vec3) -> Result<BoundaryClass, GeometryError> {
        let n = self.outward_normal(x)?;
        let speed = v.norm();
        let s = n.dot(v);
        if s > GRAZING_TOL * speed {
            return Ok(BoundaryClass::Outgoing);
        }
        if s < -GRAZING_TOL * speed {
            return Ok(BoundaryClass::Ingoing);
        }
        if speed == 0.0 {
            return Ok(BoundaryClass::Grazing);
        }
        Ok(if self.inflection_grazing(x, v) { BoundaryClass::InwardInflectionGrazing } else { BoundaryClass::Grazing })
    }

    /// Backward probes `x - tau v` all exterior (so `t_min(x, v) = 0`) while the forward
    /// probes `x + tau v` stay in the closed domain (`t_min(x, -v) > 0`).
    fn inflection_grazing(&self, x: &Vec3, v: &Vec3) -> bool {
        let delta = INFLECTION_PROBE * self.bounding_radius / v.norm();
        let probes = (1..=8).map(|i| delta * i as f64 / 8.0);
        let backward_exterior = probes.clone().all(|tau| self.level(&(x - v * tau)) > 0.0);
        let forward_inside = probes.clone().all(|tau| self.level(&(x + v * tau)) <= 0.0);
        backward_exterior && forward_inside
    }

    /// Backward flight within `[0, cap]` for path sampling: closed form on ball and ellipsoid
    /// (footprint snapped onto the ball surface), marching otherwise.
    pub fn flight(&self, x: &Vec3, v: &Vec3, cap: f64) -> Result<Option<ExitHit>, GeometryError> {
        let Some(t) = self.analytic_exit_time(x, v) else {
            return self.exit_within(x, v, cap);
        };
        if cap <= 0.0 || t > cap {
            return Ok(None);
        }
        let mut footprint = x - v * t;
        if let Shape::Ball(r) = self.shape {
            footprint *= r / footprint.norm();
        }
        Ok(Some(ExitHit { time: t, footprint }))
    }

    /// Closed-form backward chord for ball and ellipsoid (oracle for the marcher).
    pub fn analytic_exit_time(&self, x: &Vec3, v: &Vec3) -> Option<f64> {
        let (xs, vs) = match &self.shape {
            Shape::Ball(r) => (x / *r, v / *r),
            Shape::Ellipsoid(a) => (x.component_div(a), v.component_div(a)),
            Shape::Implicit(_) => return None,
        };
        // |xs - t vs|^2 = 1, largest root.
        let a = vs.norm_squared();
        let b = xs.dot(&vs);
        let c = xs.norm_squared() - 1.0;
        let disc = (b * b - a * c).max(0.0);
        let root = if b >= 0.0 { (b + disc.sqrt()) / a } else { -c / (disc.sqrt() - b) };
        Some(root.max(0.0))
    }

    /// Uniform sample of a boundary point from a direction (radial projection), for tests and probes.
    pub fn radial_boundary_point(&self, dir: &Vec3) -> Vec3 {
        let u = dir.normalize();
        let r = crate::quadrature::bisect(|s| self.level(&(u * s)), 0.0, 2.0 * self.bounding_radius, 1e-15);
        u * r
    }
}

/// Orthonormal pair completing `n` to a right-handed frame.
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_and_ellipsoid_normals() {
        let b1 = Domain::ball(1.0);
        assert_relative_eq!(b1.outward_normal(&Vec3::new(1.0, 0.0, 0.0)).unwrap(), Vec3::x(), epsilon = 1e-12);
        let b2 = Domain::ball(2.0);
        assert_relative_eq!(b2.outward_normal(&Vec3::new(0.0, 0.0, 2.0)).unwrap(), Vec3::z(), epsilon = 1e-12);
        let e = Domain::ellipsoid(2.0, 1.0, 1.0);
        assert_relative_eq!(e.outward_normal(&Vec3::new(2.0, 0.0, 0.0)).unwrap(), Vec3::x(), epsilon = 1e-12);
    }

    #[test]
    fn normals_are_lipschitz_along_the_surface() {
        // Per-shape constant: the largest principal curvature, a_max / c_min^2 for an ellipsoid.
        for (d, lip) in [(Domain::ball(1.0), 1.0), (Domain::ellipsoid(1.0, 0.8, 0.6), 1.0 / 0.36)] {
            let mut worst: f64 = 0.0;
            for i in 0..400 {
                let (th, ph) = (0.05 + 3.0 * (i as f64) / 400.0, 0.37 * i as f64);
                let dir = |th: f64, ph: f64| Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
                let (x, y) = (d.radial_boundary_point(&dir(th, ph)), d.radial_boundary_point(&dir(th + 1e-3, ph + 1e-3)));
                let (nx, ny) = (d.outward_normal(&x).unwrap(), d.outward_normal(&y).unwrap());
                worst = worst.max((nx - ny).norm() / (x - y).norm());
            }
            assert!(worst <= 1.01 * lip, "{worst} > {lip}");
        }
    }

    #[test]
    fn normal_requires_boundary_point() {
        let b = Domain::ball(1.0);
        assert!(matches!(b.outward_normal(&Vec3::new(0.5, 0.0, 0.0)), Err(GeometryError::NotOnBoundary(_))));
    }

    #[test]
    fn ball_exit_times() {
        let b = Domain::ball(1.0);
        let h = b.backward_exit_time(&Vec3::zeros(), &Vec3::x()).unwrap();
        assert_relative_eq!(h.time, 1.0, epsilon = 1e-12);
        assert_relative_eq!(h.footprint, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
        let h = b.backward_exit_time(&Vec3::new(0.5, 0.0, 0.0), &Vec3::x()).unwrap();
        assert_relative_eq!(h.time, 1.5, epsilon = 1e-12);
        let h = b.backward_exit_time(&Vec3::x(), &Vec3::y()).unwrap();
        assert!(h.time < 1e-6, "tangent backward ray leaves at once, got {}", h.time);
    }

    #[test]
    fn exit_time_errors() {
        let b = Domain::ball(1.0);
        assert_eq!(b.backward_exit_time(&Vec3::zeros(), &Vec3::zeros()), Err(GeometryError::ZeroVelocity));
        assert!(matches!(b.backward_exit_time(&Vec3::new(2.0, 0.0, 0.0), &Vec3::x()), Err(GeometryError::OutsideDomain(_))));
    }

    #[test]
    fn ball_classification() {
        let b = Domain::ball(1.0);
        let x = Vec3::x();
        assert_eq!(b.classify_boundary(&x, &Vec3::x()).unwrap(), BoundaryClass::Outgoing);
        assert_eq!(b.classify_boundary(&x, &-Vec3::x()).unwrap(), BoundaryClass::Ingoing);
        assert_eq!(b.classify_boundary(&x, &Vec3::y()).unwrap(), BoundaryClass::Grazing);
    }

    #[test]
    fn superquadric_and_ellipsoid_agree_at_exponent_two() {
        let sq = Domain::from_spec(&ShapeSpec::Superquadric { semi_axes: [2.0, 1.0, 1.5], exponent: 2.0 }).unwrap();
        let el = Domain::ellipsoid(2.0, 1.0, 1.5);
        let x = Vec3::new(0.3, -0.2, 0.1);
        let v = Vec3::new(0.4, 1.0, -0.7);
        let a = sq.backward_exit_time(&x, &v).unwrap().time;
        let b = el.analytic_exit_time(&x, &v).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn peanut_waist_is_nonconvex() {
        let d = Domain::from_spec(&ShapeSpec::Peanut { focus: 0.7, size: 0.8 }).unwrap();
        assert!(!d.is_convex());
        // A chord along the axis through both lobes stays inside except near the waist surface.
        let top = d.radial_boundary_point(&Vec3::y());
        let v = Vec3::x();
        // Tangent along the axis at the waist: the line runs into the lobes, so t_min > 0.
        assert!(d.backward_exit_time(&(top - Vec3::y() * 1e-9), &v).unwrap().time > 0.05);
    }
}
