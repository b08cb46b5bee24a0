//! Transport with absorption, source and inflow under partial specular reflection:
//! `d_t f + v . grad f + q1 f = q2`, with `f(t, x, v) = (1 - alpha) f(t, x, R_x v) + g(t, x, v)`
//! for velocities leaving the wall.
//!
//! Along the backward specular trajectory with footprints `x_k` at times `s_k` (`s_0 = t`,
//! `s_{N+1} = 0`) and segment velocities `V_k`, writing `E(s) = exp(-int_s^t q1)`:
//!
//! ```text
//! f(t, x, v) = (1 - alpha)^N E(0) f0(X(0), V_N)
//!            + sum_{k=1..N} (1 - alpha)^{k-1} E(s_k) g(s_k, x_k, V_{k-1})
//!            + sum_{k=0..N} (1 - alpha)^k int_{s_{k+1}}^{s_k} E(s) q2(s, X(s), V_k) ds
//! ```

use crate::characteristics::{trace_backward, TraceStatus};
use crate::geometry::Domain;
use crate::quadrature::gauss_legendre;
use crate::Vec3;

use super::SolverError;

const SEGMENT_NODES: usize = 16;
const REBOUND_CAP: usize = 10_000;

type Coefficient<'a> = &'a (dyn Fn(f64, &Vec3, &Vec3) -> f64 + Sync);

/// Coefficients and data; `q1`, `q2` and `g` take `(s, x, v)`.
pub struct InflowProblem<'a> {
    pub q1: Coefficient<'a>,
    pub q2: Coefficient<'a>,
    pub f0: &'a (dyn Fn(&Vec3, &Vec3) -> f64 + Sync),
    pub g: Coefficient<'a>,
}

/// Straight piece of the trajectory: `X(s) = end - (s_end - s) velocity` for `s in [start, s_end]`.
struct Segment {
    start: f64,
    end_time: f64,
    end: Vec3,
    velocity: Vec3,
}

impl Segment {
    fn at(&self, s: f64) -> Vec3 {
        self.end - self.velocity * (self.end_time - s)
    }
}

/// Footprint data `(s_k, x_k, V_{k-1})`.
type Wall = (f64, Vec3, Vec3);

/// Segments ordered from the latest (`k = 0`) to the earliest, plus their walls.
fn segments(domain: &Domain, t: f64, x: &Vec3, v: &Vec3) -> Result<(Vec<Segment>, Vec<Wall>), SolverError> {
    let traj = trace_backward(domain, t, x, v, REBOUND_CAP)?;
    match traj.status {
        TraceStatus::GrazingEncountered => {
            let at = traj.footprints.last().map_or(t, |f| t - f.hit_time);
            return Err(SolverError::GrazingEncountered(at));
        }
        TraceStatus::ReboundCapExceeded => return Err(SolverError::BadConfig("rebound cap exceeded".into())),
        TraceStatus::ReachedInitialPlane => {}
    }
    let mut segs = Vec::with_capacity(traj.footprints.len() + 1);
    let mut walls = Vec::with_capacity(traj.footprints.len());
    let (mut end_time, mut end, mut vel) = (t, *x, *v);
    for fp in &traj.footprints {
        let s = t - fp.hit_time;
        segs.push(Segment { start: s, end_time, end, velocity: vel });
        walls.push((s, fp.hit_point, fp.incoming_velocity));
        end_time = s;
        end = fp.hit_point;
        vel = fp.post_reflection_velocity;
    }
    segs.push(Segment { start: 0.0, end_time, end, velocity: vel });
    Ok((segs, walls))
}

fn integrate_segment(seg: &Segment, a: f64, b: f64, f: impl Fn(f64, &Vec3) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    gauss_legendre(SEGMENT_NODES, a, b).into_iter().map(|(s, w)| w * f(s, &seg.at(s))).sum()
}

/// Closed-form evaluation of `f(t, x, v)`.
pub fn solve_transport_inflow(
    domain: &Domain,
    alpha: f64,
    problem: &InflowProblem<'_>,
    t: f64,
    x: &Vec3,
    v: &Vec3,
) -> Result<f64, SolverError> {
    let (segs, walls) = segments(domain, t, x, v)?;
    // later[k] = int_{s_k}^t q1 along the trajectory.
    let mut later = vec![0.0; segs.len() + 1];
    for (k, seg) in segs.iter().enumerate() {
        later[k + 1] = later[k] + integrate_segment(seg, seg.start, seg.end_time, |s, y| (problem.q1)(s, y, &seg.velocity));
    }
    let survive = |k: usize| (1.0 - alpha).powi(k as i32);
    let mut value = 0.0;
    for (k, seg) in segs.iter().enumerate() {
        let atten = |s: f64| {
            let partial = integrate_segment(seg, s, seg.end_time, |r, y| (problem.q1)(r, y, &seg.velocity));
            (-(later[k] + partial)).exp()
        };
        value +=
            survive(k) * integrate_segment(seg, seg.start, seg.end_time, |s, y| atten(s) * (problem.q2)(s, y, &seg.velocity));
    }
    for (k, (s, y, w)) in walls.iter().enumerate() {
        value += survive(k) * (-later[k + 1]).exp() * (problem.g)(*s, y, w);
    }
    let last = segs.last().expect("at least one segment");
    value += survive(walls.len()) * (-later[segs.len()]).exp() * (problem.f0)(&last.at(0.0), &last.velocity);
    Ok(value)
}

/// Independent oracle: RK4 on `df/ds = -q1 f + q2` forward along the same trajectory with
/// `steps_per_unit` steps per unit time, applying the wall law at each footprint.
pub fn transport_inflow_rk4(
    domain: &Domain,
    alpha: f64,
    problem: &InflowProblem<'_>,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    steps_per_unit: usize,
) -> Result<f64, SolverError> {
    let (segs, walls) = segments(domain, t, x, v)?;
    let last = segs.last().expect("at least one segment");
    let mut f = (problem.f0)(&last.at(0.0), &last.velocity);
    for (k, seg) in segs.iter().enumerate().rev() {
        let len = seg.end_time - seg.start;
        let n = ((len * steps_per_unit as f64).ceil() as usize).max(1);
        let h = len / n as f64;
        let rhs = |s: f64, f: f64| -(problem.q1)(s, &seg.at(s), &seg.velocity) * f + (problem.q2)(s, &seg.at(s), &seg.velocity);
        for i in 0..n {
            let s = seg.start + i as f64 * h;
            let k1 = rhs(s, f);
            let k2 = rhs(s + 0.5 * h, f + 0.5 * h * k1);
            let k3 = rhs(s + 0.5 * h, f + 0.5 * h * k2);
            let k4 = rhs(s + h, f + h * k3);
            f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if k > 0 {
            let (s, y, w) = walls[k - 1];
            f = (1.0 - alpha) * f + (problem.g)(s, &y, &w);
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(_: f64, _: &Vec3, _: &Vec3) -> f64 {
        0.0
    }

    #[test]
    fn full_accommodation_kills_the_initial_term_after_a_rebound() {
        let d = Domain::ball(1.0);
        let f0 = |_: &Vec3, _: &Vec3| 1.0;
        let p = InflowProblem { q1: &zero, q2: &zero, f0: &f0, g: &zero };
        let x = Vec3::new(0.5, 0.0, 0.0);
        let v = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(solve_transport_inflow(&d, 1.0, &p, 0.3, &x, &v).unwrap(), 1.0);
        assert_eq!(solve_transport_inflow(&d, 1.0, &p, 2.0, &x, &v).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_matches_rk4_through_rebounds() {
        let d = Domain::ball(1.0);
        let q1 = |s: f64, x: &Vec3, _: &Vec3| 0.5 + 0.3 * x.x + 0.1 * s;
        let q2 = |s: f64, x: &Vec3, v: &Vec3| (x.y + v.z).sin() + s;
        let f0 = |x: &Vec3, v: &Vec3| 1.0 + x.norm_squared() + 0.2 * v.x;
        let g = |s: f64, x: &Vec3, _: &Vec3| 0.3 * (s + x.z).cos();
        let p = InflowProblem { q1: &q1, q2: &q2, f0: &f0, g: &g };
        let x = Vec3::new(0.2, -0.1, 0.3);
        let v = Vec3::new(1.1, 0.7, -0.4);
        let exact = solve_transport_inflow(&d, 0.3, &p, 2.5, &x, &v).unwrap();
        let oracle = transport_inflow_rk4(&d, 0.3, &p, 2.5, &x, &v, 2000).unwrap();
        assert!((exact - oracle).abs() < 1e-8 * exact.abs().max(1.0), "{exact} vs {oracle}");
    }
}
