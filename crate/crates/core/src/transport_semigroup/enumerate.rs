//! Exact expansion of the semigroup over reflection patterns with at most `p` rebounds.
//!
//! Specular branches are followed deterministically and diffuse branches by a product Gauss
//! rule for the wall law: composite Gauss-Legendre against the Rayleigh density for the normal
//! component and against the Gaussian for the tangential ones.

use rayon::prelude::*;
use serde::Serialize;

use super::paths::PathSampler;
use super::{PhaseFunction, TransportError};
use crate::characteristics::reflect_specular;
use crate::gas_state::maxwellian;
use crate::geometry::{tangent_frame, GRAZING_TOL};
use crate::quadrature::gauss_legendre;
use crate::Vec3;

pub const MAX_ENUMERATION_DEPTH: usize = 3;

/// Discrete probability measure approximating the diffuse law in the local wall frame.
#[derive(Clone, Debug)]
pub struct DiffuseRule {
    /// `([z, t1, t2], weight)` with weights summing to one.
    points: Vec<([f64; 3], f64)>,
}

/// Panel edges graded towards zero velocity, where attenuation `exp(-nu s)` concentrates the
/// branch integrands.
const NORMAL_EDGES: [f64; 11] = [0.0, 0.1, 0.2, 0.4, 0.7, 1.1, 1.7, 2.6, 4.0, 6.0, 9.0];
const COARSE_EDGES: [f64; 7] = [0.0, 0.3, 0.8, 1.6, 3.0, 5.0, 9.0];

impl DiffuseRule {
    /// Product rule with `q_normal` Legendre nodes per normal panel and `q_tangent` per
    /// tangential panel; tangential panels mirror the normal ones, dropping the outermost.
    pub fn new(q_normal: usize, q_tangent: usize) -> Self {
        Self::graded(&NORMAL_EDGES, q_normal, q_tangent)
    }

    /// Same construction on six panels, for deep rebounds where a cheap rule suffices.
    pub fn coarse(q_normal: usize, q_tangent: usize) -> Self {
        Self::graded(&COARSE_EDGES, q_normal, q_tangent)
    }

    /// The level rules used by the oracle comparison: fine at the first rebound, coarse after.
    pub fn standard_levels() -> [Self; 3] {
        [Self::new(2, 1), Self::coarse(2, 2), Self::coarse(1, 1)]
    }

    fn graded(normal_edges: &[f64], q_normal: usize, q_tangent: usize) -> Self {
        let panels = |edges: &[f64], q: usize| -> Vec<(f64, f64)> {
            edges.windows(2).flat_map(|w| gauss_legendre(q, w[0], w[1])).collect()
        };
        let normal: Vec<(f64, f64)> =
            panels(normal_edges, q_normal).into_iter().map(|(z, w)| (z, w * z * (-0.5 * z * z).exp())).collect();
        let half = &normal_edges[..normal_edges.len() - 1];
        let mut edges: Vec<f64> = half.iter().rev().map(|e| -e).collect();
        edges.extend_from_slice(&half[1..]);
        let gauss = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let tangent: Vec<(f64, f64)> =
            panels(&edges, q_tangent).into_iter().map(|(t, w)| (t, w * gauss * (-0.5 * t * t).exp())).collect();
        let mut points = Vec::with_capacity(normal.len() * tangent.len() * tangent.len());
        for &(z, wz) in &normal {
            for &(a, wa) in &tangent {
                for &(b, wb) in &tangent {
                    points.push(([z, a, b], wz * wa * wb));
                }
            }
        }
        let total: f64 = points.iter().map(|p| p.1).sum();
        points.iter_mut().for_each(|p| p.1 /= total);
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Velocities of the rule at a wall with outward normal `n`.
    pub fn velocities(&self, n: &Vec3) -> impl Iterator<Item = (Vec3, f64)> + '_ {
        let (e1, e2) = tangent_frame(n);
        let n = *n;
        self.points.iter().map(move |&([z, a, b], w)| (n * z + e1 * a + e2 * b, w))
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Enumeration {
    /// `I_p`: contribution of paths reaching the initial time within `p` rebounds.
    pub ip: f64,
    /// `mu(v)` times the attenuated mass of paths needing more than `p` rebounds.
    pub remaining_mass: f64,
    pub flights: usize,
}

impl std::ops::AddAssign for Enumeration {
    fn add_assign(&mut self, o: Self) {
        self.ip += o.ip;
        self.remaining_mass += o.remaining_mass;
        self.flights += o.flights;
    }
}

impl Enumeration {
    fn scaled(self, s: f64) -> Self {
        Self { ip: s * self.ip, remaining_mass: s * self.remaining_mass, flights: self.flights }
    }
}

struct Expander<'s, 'a, F: ?Sized> {
    sampler: &'s PathSampler<'a>,
    f0: &'s F,
    p: usize,
    rules: &'s [DiffuseRule],
}

impl<F: PhaseFunction + ?Sized> Expander<'_, '_, F> {
    fn level(&self, depth: usize, pos: Vec3, vel: Vec3, remaining: f64, att: f64) -> Result<Enumeration, TransportError> {
        let nu = self.sampler.frequency(vel.norm());
        let Some(hit) = self.sampler.domain().flight(&pos, &vel, remaining)? else {
            let a = att * (-nu * remaining).exp();
            return Ok(Enumeration { ip: a * self.f0.ratio(&(pos - vel * remaining), &vel), remaining_mass: 0.0, flights: 1 });
        };
        let att = att * (-nu * hit.time).exp();
        let remaining = remaining - hit.time;
        if depth >= self.p {
            return Ok(Enumeration { ip: 0.0, remaining_mass: att, flights: 1 });
        }
        let y = hit.footprint;
        let n = self.sampler.domain().normal_unchecked(&y)?;
        let mut out = Enumeration { flights: 1, ..Default::default() };
        if n.dot(&vel).abs() <= GRAZING_TOL * vel.norm() {
            return Ok(out);
        }
        let alpha = self.sampler.alpha();
        if alpha < 1.0 {
            let reflected = reflect_specular(&n, &vel).expect("unit normal");
            out += self.level(depth + 1, y, reflected, remaining, att)?.scaled(1.0 - alpha);
        }
        let d = self.sampler.diffuse_factor();
        if d > 0.0 {
            let rule = &self.rules[depth.min(self.rules.len() - 1)];
            let branches: Vec<(Vec3, f64)> = rule.velocities(&n).collect();
            let parts: Vec<Enumeration> = if depth == 0 {
                branches
                    .par_iter()
                    .map(|&(w, q)| self.level(depth + 1, y, w, remaining, att).map(|e| e.scaled(d * q)))
                    .collect::<Result<_, _>>()?
            } else {
                branches
                    .iter()
                    .map(|&(w, q)| self.level(depth + 1, y, w, remaining, att).map(|e| e.scaled(d * q)))
                    .collect::<Result<_, _>>()?
            };
            for e in parts {
                out += e;
            }
        }
        Ok(out)
    }
}

/// `I_p(t, x, v)` and the remaining path mass by exhaustive expansion. `rules[k]` discretizes
/// the diffuse law at the `k`-th rebound (the last rule is reused for deeper rebounds).
#[allow(clippy::too_many_arguments)]
pub fn enumerate_ip_rp<F: PhaseFunction + ?Sized>(
    sampler: &PathSampler<'_>,
    t: f64,
    x: &Vec3,
    v: &Vec3,
    p: usize,
    f0: &F,
    rules: &[DiffuseRule],
) -> Result<Enumeration, TransportError> {
    if p > MAX_ENUMERATION_DEPTH {
        return Err(TransportError::PTooLarge(p));
    }
    if t <= 0.0 {
        return Ok(Enumeration { ip: f0.value(x, v), remaining_mass: 0.0, flights: 0 });
    }
    let fallback = [DiffuseRule::new(2, 1)];
    let rules = if rules.is_empty() { &fallback[..] } else { rules };
    let e = Expander { sampler, f0, p, rules }.level(0, *x, *v, t, 1.0)?;
    Ok(e.scaled(maxwellian(v)))
}
