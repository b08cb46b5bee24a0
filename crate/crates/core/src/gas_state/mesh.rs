//! Regular Cartesian cells on the bounding cube, intersected with the domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Domain;
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh needs n_per_axis >= 2 and subsamples >= 1")]
    InvalidMesh,
    #[error("no cell intersects the domain")]
    Empty,
}

fn default_subsamples() -> usize {
    4
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub n_per_axis: usize,
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { n_per_axis: 6, subsamples: default_subsamples() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub lattice: [usize; 3],
    pub center: Vec3,
    /// Representative point inside the domain (centroid of the inside subsamples).
    pub point: Vec3,
    /// Fraction of the cube inside the domain.
    pub fraction: f64,
    pub volume: f64,
}

/// Trilinear weights over cells, renormalized over the cells that exist.
#[derive(Clone, Copy, Debug)]
pub struct MeshStencil {
    pub len: usize,
    pub cell: [usize; 8],
    pub weight: [f64; 8],
}

impl MeshStencil {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(|s| (self.cell[s], self.weight[s]))
    }
}

#[derive(Clone, Debug)]
pub struct SpatialMesh {
    spec: MeshSpec,
    half_width: f64,
    h: f64,
    cells: Vec<Cell>,
    lookup: Vec<Option<usize>>,
}

impl SpatialMesh {
    pub fn new(domain: &Domain, spec: MeshSpec) -> Result<Self, MeshError> {
        let n = spec.n_per_axis;
        let s = spec.subsamples;
        if n < 2 || s == 0 {
            return Err(MeshError::InvalidMesh);
        }
        let half_width = domain.bounding_radius();
        let h = 2.0 * half_width / n as f64;
        let sub = h / s as f64;
        let mut cells = Vec::new();
        let mut lookup = vec![None; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lo = Vec3::new(i as f64, j as f64, k as f64) * h - Vec3::repeat(half_width);
                    let inside: Vec<Vec3> = (0..s * s * s)
                        .map(|q| {
                            let (a, b, c) = (q / (s * s), (q / s) % s, q % s);
                            lo + Vec3::new(a as f64 + 0.5, b as f64 + 0.5, c as f64 + 0.5) * sub
                        })
                        .filter(|y| domain.contains(y))
                        .collect();
                    if inside.is_empty() {
                        continue;
                    }
                    let centroid = inside.iter().sum::<Vec3>() / inside.len() as f64;
                    let point = if domain.contains(&centroid) {
                        centroid
                    } else {
                        *inside.iter().min_by(|p, q| (*p - centroid).norm().total_cmp(&(*q - centroid).norm())).expect("nonempty")
                    };
                    let fraction = inside.len() as f64 / (s * s * s) as f64;
                    lookup[(i * n + j) * n + k] = Some(cells.len());
                    cells.push(Cell {
                        lattice: [i, j, k],
                        center: lo + Vec3::repeat(0.5 * h),
                        point,
                        fraction,
                        volume: fraction * h * h * h,
                    });
                }
            }
        }
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        Ok(Self { spec, half_width, h, cells, lookup })
    }

    pub fn spec(&self) -> MeshSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    pub fn cell_at(&self, lattice: [usize; 3]) -> Option<usize> {
        let n = self.spec.n_per_axis;
        self.lookup[(lattice[0] * n + lattice[1]) * n + lattice[2]]
    }

    /// Cell whose cube contains `y`, if that cube intersects the domain.
    pub fn locate(&self, y: &Vec3) -> Option<usize> {
        let n = self.spec.n_per_axis;
        let mut lat = [0usize; 3];
        for d in 0..3 {
            let g = ((y[d] + self.half_width) / self.h).floor();
            if g < 0.0 || g >= n as f64 {
                return None;
            }
            lat[d] = g as usize;
        }
        self.cell_at(lat)
    }

    /// Trilinear stencil on the lattice of cell centres, coordinates clamped to the lattice;
    /// corners without a cell are dropped and the rest renormalized.
    pub fn stencil(&self, y: &Vec3) -> MeshStencil {
        let n = self.spec.n_per_axis;
        let top = (n - 1) as f64;
        let mut base = [0usize; 3];
        let mut fr = [0.0; 3];
        for d in 0..3 {
            let g = ((y[d] + self.half_width) / self.h - 0.5).clamp(0.0, top);
            let i = g.floor().min(top - 1.0);
            base[d] = i as usize;
            fr[d] = g - i;
        }
        let mut st = MeshStencil { len: 0, cell: [0; 8], weight: [0.0; 8] };
        let mut total = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut lat = [0usize; 3];
            for d in 0..3 {
                let up = (corner >> (2 - d)) & 1;
                lat[d] = base[d] + up;
                w *= if up == 1 { fr[d] } else { 1.0 - fr[d] };
            }
            if w <= 0.0 {
                continue;
            }
            if let Some(c) = self.cell_at(lat) {
                st.cell[st.len] = c;
                st.weight[st.len] = w;
                st.len += 1;
                total += w;
            }
        }
        if st.len == 0 || total < 1e-12 {
            let nearest = self.nearest_cell(y);
            return MeshStencil {
                len: 1,
                cell: [nearest, 0, 0, 0, 0, 0, 0, 0],
                weight: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            };
        }
        for w in &mut st.weight[..st.len] {
            *w /= total;
        }
        st
    }

    pub fn nearest_cell(&self, y: &Vec3) -> usize {
        (0..self.cells.len())
            .min_by(|&a, &b| (self.cells[a].point - y).norm().total_cmp(&(self.cells[b].point - y).norm()))
            .expect("mesh is nonempty")
    }

    /// Cells whose cube is cut by the boundary.
    pub fn boundary_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, c)| c.fraction < 1.0).map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_converges() {
        let d = Domain::ball(1.0);
        let m = SpatialMesh::new(&d, MeshSpec { n_per_axis: 8, subsamples: 4 }).unwrap();
        assert!((m.total_volume() - 4.0 * PI / 3.0).abs() < 0.05);
        assert!(m.cells().iter().all(|c| d.contains(&c.point)));
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        let d = Domain::ball(1.0);
        let m = SpatialMesh::new(&d, MeshSpec { n_per_axis: 6, subsamples: 3 }).unwrap();
        for y in [Vec3::zeros(), Vec3::new(0.9, 0.1, -0.2), Vec3::new(-0.5, 0.5, 0.5)] {
            let st = m.stencil(&y);
            let total: f64 = st.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_mesh_has_zero_first_moment() {
        let d = Domain::ball(1.0);
        let m = SpatialMesh::new(&d, MeshSpec { n_per_axis: 6, subsamples: 4 }).unwrap();
        let first: Vec3 = m.cells().iter().map(|c| c.point * c.volume).sum();
        assert!(first.norm() < 1e-12);
    }
}
