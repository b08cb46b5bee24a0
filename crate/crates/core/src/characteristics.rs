//! Backward characteristics with purely specular reflection.
//!
//! Starting from `(x, v)` the trajectory runs along `x - s v`; at each wall hit
//! `X_{k+1} = X_k - t_min(X_k, V_k) V_k` the velocity is mirrored,
//! `V_{k+1} = R_{X_{k+1}} V_k`, until the accumulated time reaches `t`.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{BoundaryClass, Domain, GeometryError, GRAZING_TOL};
use crate::Vec3;

pub const DEFAULT_REBOUND_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacteristicsError {
    #[error("normal is not a unit vector (|n| = {0})")]
    NonUnitNormal(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Mirror `v` across the plane orthogonal to the unit normal `n`.
pub fn reflect_specular(n: &Vec3, v: &Vec3) -> Result<Vec3, CharacteristicsError> {
    let len = n.norm();
    if (len - 1.0).abs() > 1e-12 {
        return Err(CharacteristicsError::NonUnitNormal(len));
    }
    Ok(reflect(n, v))
}

#[inline]
pub(crate) fn reflect(n: &Vec3, v: &Vec3) -> Vec3 {
    v - n * (2.0 * n.dot(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Footprint {
    /// Accumulated backward time `T_k`.
    pub hit_time: f64,
    pub hit_point: Vec3,
    /// Velocity arriving at the wall, before the mirror (`V_{k-1}`).
    pub incoming_velocity: Vec3,
    /// `V_k`.
    pub post_reflection_velocity: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceStatus {
    ReachedInitialPlane,
    GrazingEncountered,
    ReboundCapExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct BackwardTrajectory {
    pub time: f64,
    pub origin: Vec3,
    pub velocity: Vec3,
    pub footprints: Vec<Footprint>,
    /// Position reached at backward time `time` (meaningful when the plane was reached).
    pub terminal: Vec3,
    /// Velocity carried on the last segment.
    pub terminal_velocity: Vec3,
    pub status: TraceStatus,
}

impl BackwardTrajectory {
    pub fn rebounds(&self) -> usize {
        self.footprints.len()
    }
}

/// Trace the specular backward characteristic of `(x, v)` over time `t`.
pub fn trace_backward(domain: &Domain, t: f64, x: &Vec3, v: &Vec3, cap: usize) -> Result<BackwardTrajectory, GeometryError> {
    let mut traj = BackwardTrajectory {
        time: t,
        origin: *x,
        velocity: *v,
        footprints: Vec::new(),
        terminal: *x,
        terminal_velocity: *v,
        status: TraceStatus::ReachedInitialPlane,
    };
    if t <= 0.0 {
        return Ok(traj);
    }
    if domain.on_boundary(x) {
        if let Ok(n) = domain.normal_unchecked(x) {
            if n.dot(v).abs() <= GRAZING_TOL * v.norm() {
                traj.status = TraceStatus::GrazingEncountered;
                return Ok(traj);
            }
        }
    }
    let (mut pos, mut vel, mut elapsed) = (*x, *v, 0.0);
    loop {
        let remaining = t - elapsed;
        match domain.exit_within(&pos, &vel, remaining)? {
            None => {
                traj.terminal = pos - vel * remaining;
                traj.terminal_velocity = vel;
                traj.status = TraceStatus::ReachedInitialPlane;
                return Ok(traj);
            }
            Some(hit) => {
                if traj.footprints.len() >= cap {
                    traj.terminal = pos;
                    traj.terminal_velocity = vel;
                    traj.status = TraceStatus::ReboundCapExceeded;
                    return Ok(traj);
                }
                elapsed += hit.time;
                let n = domain.normal_unchecked(&hit.footprint)?;
                if n.dot(&vel).abs() <= GRAZING_TOL * vel.norm() {
                    traj.terminal = hit.footprint;
                    traj.terminal_velocity = vel;
                    traj.status = TraceStatus::GrazingEncountered;
                    return Ok(traj);
                }
                let reflected = reflect(&n, &vel);
                traj.footprints.push(Footprint {
                    hit_time: elapsed,
                    hit_point: hit.footprint,
                    incoming_velocity: vel,
                    post_reflection_velocity: reflected,
                });
                pos = hit.footprint;
                vel = reflected;
            }
        }
    }
}

/// Membership of `(t, x, v)` in the continuity set: interior or outgoing starts whose every
/// wall hit within time `t` lies in `Lambda^- ∪ Lambda_0^(I-)` for the arriving velocity, plus
/// the boundary branches at `t = 0` and `t > 0`.
pub fn in_continuity_set(domain: &Domain, t: f64, x: &Vec3, v: &Vec3) -> bool {
    let boundary_class = if domain.on_boundary(x) {
        match domain.classify_boundary(x, v) {
            Ok(c) => Some(c),
            Err(_) => return false,
        }
    } else if domain.is_interior(x) {
        None
    } else {
        return false;
    };
    let in_boundary_continuity = |c: BoundaryClass| matches!(c, BoundaryClass::Ingoing | BoundaryClass::InwardInflectionGrazing);
    if t <= 0.0 {
        return boundary_class.is_none_or(|c| c == BoundaryClass::Outgoing || in_boundary_continuity(c));
    }
    match boundary_class {
        Some(c) if in_boundary_continuity(c) => return true,
        Some(BoundaryClass::Grazing) => return false,
        _ => {}
    }
    let traj = match trace_backward(domain, t, x, v, DEFAULT_REBOUND_CAP) {
        Ok(traj) if traj.status == TraceStatus::ReachedInitialPlane => traj,
        _ => return false,
    };
    traj.footprints
        .iter()
        .all(|fp| domain.classify_boundary(&fp.hit_point, &fp.incoming_velocity).map(in_boundary_continuity).unwrap_or(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reflection_examples() {
        let x = Vec3::x();
        assert_eq!(reflect_specular(&x, &Vec3::new(-1.0, 0.0, 0.0)).unwrap(), Vec3::x());
        assert_eq!(reflect_specular(&x, &Vec3::y()).unwrap(), Vec3::y());
        assert_eq!(reflect_specular(&Vec3::z(), &Vec3::new(1.0, 2.0, -3.0)).unwrap(), Vec3::new(1.0, 2.0, 3.0));
        assert!(matches!(reflect_specular(&Vec3::new(2.0, 0.0, 0.0), &x), Err(CharacteristicsError::NonUnitNormal(_))));
    }

    #[test]
    fn short_trace_has_no_rebound() {
        let d = Domain::ball(1.0);
        let tr = trace_backward(&d, 0.5, &Vec3::zeros(), &Vec3::x(), DEFAULT_REBOUND_CAP).unwrap();
        assert_eq!(tr.rebounds(), 0);
        assert_eq!(tr.status, TraceStatus::ReachedInitialPlane);
        assert_relative_eq!(tr.terminal, Vec3::new(-0.5, 0.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn diameter_bounce() {
        let d = Domain::ball(1.0);
        let tr = trace_backward(&d, 2.5, &Vec3::zeros(), &Vec3::x(), DEFAULT_REBOUND_CAP).unwrap();
        assert_eq!(tr.rebounds(), 1);
        let fp = tr.footprints[0];
        assert_relative_eq!(fp.hit_point, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(fp.post_reflection_velocity, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(tr.terminal, Vec3::new(0.5, 0.0, 0.0), epsilon = 1e-10);
    }

    #[test]
    fn zero_time_trace_is_trivial() {
        let d = Domain::ellipsoid(2.0, 1.0, 1.0);
        let x = Vec3::new(0.2, 0.1, 0.0);
        let tr = trace_backward(&d, 0.0, &x, &Vec3::y(), DEFAULT_REBOUND_CAP).unwrap();
        assert_eq!(tr.rebounds(), 0);
        assert_eq!(tr.terminal, x);
    }

    #[test]
    fn continuity_set_on_ball() {
        let d = Domain::ball(1.0);
        assert!(in_continuity_set(&d, 0.0, &Vec3::new(0.1, 0.2, 0.0), &Vec3::y()));
        assert!(in_continuity_set(&d, 3.0, &Vec3::new(0.1, 0.2, 0.0), &Vec3::new(0.3, 1.0, -0.2)));
        // A boundary start with a tangent velocity is a grazing point of a convex domain.
        assert!(!in_continuity_set(&d, 1.0, &Vec3::y(), &Vec3::x()));
    }
}
