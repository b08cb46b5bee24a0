//! One-step free transport with Maxwell wall reflection on the discrete phase space.
//!
//! Each output `(cell, node)` traces its backward characteristic over `dt`. Segments that stay
//! inside read the previous field through the mesh stencil. At a wall hit the path splits: the
//! specular branch continues with the mirrored velocity (read through the `Ratio` velocity
//! stencil), the diffuse branch re-emits `c_mu mu(v)` times the discrete outgoing flux of the
//! previous field at the footprint. `c_mu` is the discrete normalization, so `T mu = mu` exactly.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::SolverError;
use crate::characteristics::reflect_specular;
use crate::gas_state::{Interp, MeshStencil, SpatialMesh, Stencil, VelocityGrid};
use crate::geometry::{Domain, GRAZING_TOL};
use crate::Vec3;

/// Specular continuations followed inside one step before the remaining branch weight is
/// handed to the diffuse law.
pub const MAX_STEP_REBOUNDS: usize = 8;

// Nearly every branch is a `Point`, so boxing its stencils would only add indirection.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
enum Branch {
    /// `weight * sum_cells w_c sum_nodes s_k f(c, k)`.
    Point { weight: f64, cells: MeshStencil, nodes: Stencil },
    /// `weight * sum_cells w_c sum_u flux_u f(c, u)` with `flux_u = h^3 (u . n)^+`.
    Diffuse { weight: f64, cells: MeshStencil, normal: Vec3 },
}

/// Precomputed linear map `f(t) -> f(t + dt)` for the transport part.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Arc<VelocityGrid>,
    mesh: Arc<SpatialMesh>,
    dt: f64,
    alpha: f64,
    /// Indexed by `cell * n_nodes + node`.
    branches: Vec<Vec<Branch>>,
    wall_hits: usize,
}

/// `1 / sum_u mu(u) h^3 (u . n)^+`: the discrete diffuse normalization at normal `n`.
pub fn discrete_c_mu(grid: &VelocityGrid, n: &Vec3) -> f64 {
    let w = grid.weight();
    let flux: f64 = grid.nodes().iter().zip(grid.maxwellian()).map(|(u, m)| m * w * u.dot(n).max(0.0)).sum();
    1.0 / flux
}

impl Propagator {
    pub fn new(
        domain: &Domain,
        grid: Arc<VelocityGrid>,
        mesh: Arc<SpatialMesh>,
        dt: f64,
        alpha: f64,
    ) -> Result<Self, SolverError> {
        if !(dt > 0.0) {
            return Err(SolverError::BadConfig(format!("time step must be positive, got {dt}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SolverError::BadConfig(format!("accommodation must lie in [0, 1], got {alpha}")));
        }
        let n_nodes = grid.len();
        let traced = (0..mesh.len() * n_nodes)
            .into_par_iter()
            .map(|o| {
                let (c, k) = (o / n_nodes, o % n_nodes);
                let x = mesh.cells()[c].point;
                let v = *grid.node(k);
                let mu_v = grid.maxwellian()[k];
                trace_step(domain, &grid, &mesh, alpha, dt, x, v, mu_v)
            })
            .collect::<Result<Vec<_>, SolverError>>()?;
        let wall_hits = traced.iter().filter(|(_, hit)| *hit).count();
        let branches = traced.into_iter().map(|(b, _)| b).collect();
        Ok(Self { grid, mesh, dt, alpha, branches, wall_hits })
    }

    /// Transport switched off: every output reads its own cell and node. Used to check the
    /// time stepping on spatially homogeneous problems.
    #[cfg(test)]
    pub(crate) fn identity(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>, dt: f64) -> Self {
        let own = |c: usize| {
            let mut cell = [0; 8];
            let mut weight = [0.0; 8];
            cell[0] = c;
            weight[0] = 1.0;
            MeshStencil { len: 1, cell, weight }
        };
        let branches = (0..mesh.len())
            .flat_map(|c| grid.nodes().iter().map(move |v| (c, *v)))
            .map(|(c, v)| vec![Branch::Point { weight: 1.0, cells: own(c), nodes: grid.stencil(&v, Interp::Ratio) }])
            .collect();
        Self { grid, mesh, dt, alpha: 1.0, branches, wall_hits: 0 }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn mesh(&self) -> &Arc<SpatialMesh> {
        &self.mesh
    }

    /// Fraction of outputs whose step touches the wall.
    pub fn wall_fraction(&self) -> f64 {
        self.wall_hits as f64 / self.branches.len() as f64
    }

    /// Apply to a value matrix (nodes x cells).
    pub fn apply(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let n_nodes = self.grid.len();
        let w = self.grid.weight();
        let nodes = self.grid.nodes();
        let column = |c: usize| &f.as_slice()[c * n_nodes..(c + 1) * n_nodes];
        let out: Vec<f64> = (0..self.branches.len())
            .into_par_iter()
            .map(|o| {
                self.branches[o]
                    .iter()
                    .map(|b| match b {
                        Branch::Point { weight, cells, nodes: st } => {
                            weight * cells.iter().map(|(c, wc)| wc * st.apply(column(c))).sum::<f64>()
                        }
                        Branch::Diffuse { weight, cells, normal } => {
                            let flux = |col: &[f64]| -> f64 {
                                nodes.iter().zip(col).map(|(u, fu)| w * u.dot(normal).max(0.0) * fu).sum()
                            };
                            weight * cells.iter().map(|(c, wc)| wc * flux(column(c))).sum::<f64>()
                        }
                    })
                    .sum()
            })
            .collect();
        DMatrix::from_vec(n_nodes, self.mesh.len(), out)
    }
}

#[allow(clippy::too_many_arguments)]
fn trace_step(
    domain: &Domain,
    grid: &VelocityGrid,
    mesh: &SpatialMesh,
    alpha: f64,
    dt: f64,
    x: Vec3,
    v: Vec3,
    mu_v: f64,
) -> Result<(Vec<Branch>, bool), SolverError> {
    let mut out = Vec::new();
    let (mut pos, mut vel, mut remaining, mut weight) = (x, v, dt, 1.0);
    let on_grid = grid.stencil(&v, Interp::Ratio);
    for rebound in 0..=MAX_STEP_REBOUNDS {
        let hit = domain.flight(&pos, &vel, remaining)?;
        let Some(hit) = hit else {
            let nodes = if rebound == 0 { on_grid } else { grid.stencil(&vel, Interp::Ratio) };
            out.push(Branch::Point { weight, cells: mesh.stencil(&(pos - vel * remaining)), nodes });
            return Ok((out, rebound > 0));
        };
        let y = hit.footprint;
        let n = domain.normal_unchecked(&y)?;
        let cells = mesh.stencil(&y);
        let diffuse = if n.dot(&vel).abs() <= GRAZING_TOL * vel.norm() || rebound == MAX_STEP_REBOUNDS { 1.0 } else { alpha };
        if diffuse > 0.0 {
            out.push(Branch::Diffuse { weight: weight * diffuse * discrete_c_mu(grid, &n) * mu_v, cells, normal: n });
        }
        if diffuse >= 1.0 {
            return Ok((out, true));
        }
        weight *= 1.0 - diffuse;
        vel = reflect_specular(&n, &vel).map_err(|e| SolverError::BadConfig(e.to_string()))?;
        pos = y;
        remaining -= hit.time;
    }
    Ok((out, true))
}
