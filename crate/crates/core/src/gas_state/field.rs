//! `f(x, v)` sampled on (spatial cell) x (velocity node), with norms and `.kfield` snapshots.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grid::{GridSpec, Interp, VelocityGrid};
use super::mesh::{MeshSpec, SpatialMesh};
use super::weight::Weight;
use crate::Vec3;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field shape {got:?} does not match grid x mesh {expected:?}")]
    Shape { expected: (usize, usize), got: (usize, usize) },
    #[error("malformed kfield: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Values are stored as an `n_nodes x n_cells` matrix: each column is the velocity profile of
/// one cell, so column-major storage is cell-major, node-minor.
#[derive(Clone, Debug)]
pub struct DistributionField {
    grid: Arc<VelocityGrid>,
    mesh: Arc<SpatialMesh>,
    values: DMatrix<f64>,
}

impl DistributionField {
    pub fn zeros(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>) -> Self {
        let values = DMatrix::zeros(grid.len(), mesh.len());
        Self { grid, mesh, values }
    }

    pub fn from_fn<F: Fn(&Vec3, &Vec3) -> f64>(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>, f: F) -> Self {
        let values = DMatrix::from_fn(grid.len(), mesh.len(), |k, c| f(&mesh.cells()[c].point, grid.node(k)));
        Self { grid, mesh, values }
    }

    /// `mu(v)` in every cell.
    pub fn maxwellian(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>) -> Self {
        let mu = grid.maxwellian().to_vec();
        let values = DMatrix::from_fn(grid.len(), mesh.len(), |k, _| mu[k]);
        Self { grid, mesh, values }
    }

    pub fn from_values(grid: Arc<VelocityGrid>, mesh: Arc<SpatialMesh>, values: DMatrix<f64>) -> Result<Self, FieldError> {
        let expected = (grid.len(), mesh.len());
        if values.shape() != expected {
            return Err(FieldError::Shape { expected, got: values.shape() });
        }
        Ok(Self { grid, mesh, values })
    }

    pub fn with_values(&self, values: DMatrix<f64>) -> Self {
        assert_eq!(values.shape(), self.values.shape());
        Self { grid: self.grid.clone(), mesh: self.mesh.clone(), values }
    }

    pub fn grid(&self) -> &Arc<VelocityGrid> {
        &self.grid
    }

    pub fn mesh(&self) -> &Arc<SpatialMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// Velocity profile of one cell.
    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values.as_slice()[c * n..(c + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    /// Off-grid evaluation: trilinear over cells times the chosen velocity interpolation.
    pub fn eval(&self, x: &Vec3, v: &Vec3, mode: Interp) -> f64 {
        let vs = self.grid.stencil(v, mode);
        self.mesh.stencil(x).iter().map(|(c, wc)| wc * vs.apply(self.cell(c))).sum()
    }

    /// `sum_cells vol sum_nodes h^3 f`.
    pub fn total_mass(&self) -> f64 {
        self.mesh.cells().iter().enumerate().map(|(c, cell)| cell.volume * self.grid.integrate(self.cell(c))).sum()
    }

    /// `max |f| m(v)` over all (cell, node).
    pub fn weighted_sup_norm(&self, weight: &Weight) -> f64 {
        let m: Vec<f64> = self.grid.nodes().iter().map(|v| weight.value(v.norm())).collect();
        (0..self.mesh.len()).flat_map(|c| self.cell(c).iter().zip(&m).map(|(f, w)| f.abs() * w)).fold(0.0, f64::max)
    }

    /// `(int int f^2 / mu dx dv)^{1/2}`: the `L^2` norm of `f mu^{-1/2}`.
    pub fn weighted_l2_norm(&self) -> f64 {
        let w = self.grid.weight();
        let mu = self.grid.maxwellian();
        self.mesh
            .cells()
            .iter()
            .enumerate()
            .map(|(c, cell)| cell.volume * w * self.cell(c).iter().zip(mu).map(|(f, m)| f * f / m).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `int <v>^p sup_x |f(x, v)| dv` with `<v> = (1 + |v|^2)^{1/2}`.
    pub fn l1v_linfx_norm(&self, power: f64) -> f64 {
        let w = self.grid.weight();
        (0..self.grid.len())
            .map(|k| {
                let bracket = (1.0 + self.grid.node(k).norm_squared()).powf(0.5 * power);
                let sup = self.values.row(k).iter().fold(0.0f64, |a, f| a.max(f.abs()));
                w * bracket * sup
            })
            .sum()
    }

    pub fn write_kfield<P: AsRef<Path>>(&self, path: P, time: f64) -> Result<(), FieldError> {
        let header = KFieldHeader {
            format: "kfield".into(),
            version: 1,
            grid: self.grid.spec(),
            mesh: self.mesh.spec(),
            n_cells: self.mesh.len(),
            n_nodes: self.grid.len(),
            time,
        };
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, &header).map_err(|e| FieldError::Format(e.to_string()))?;
        out.write_all(b"\n")?;
        for x in self.values.iter() {
            out.write_all(&x.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read a snapshot written for the same grid and mesh.
    pub fn read_kfield<P: AsRef<Path>>(
        path: P,
        grid: Arc<VelocityGrid>,
        mesh: Arc<SpatialMesh>,
    ) -> Result<(KFieldHeader, Self), FieldError> {
        let (header, data) = read_kfield_raw(path)?;
        if header.grid != grid.spec() || header.mesh != mesh.spec() {
            return Err(FieldError::Format("grid or mesh parameters differ from the snapshot".into()));
        }
        let values = DMatrix::from_vec(header.n_nodes, header.n_cells, data);
        let field = Self::from_values(grid, mesh, values)?;
        Ok((header, field))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFieldHeader {
    pub format: String,
    pub version: u32,
    pub grid: GridSpec,
    pub mesh: MeshSpec,
    pub n_cells: usize,
    pub n_nodes: usize,
    pub time: f64,
}

/// Header plus the raw little-endian payload in cell-major, node-minor order.
pub fn read_kfield_raw<P: AsRef<Path>>(path: P) -> Result<(KFieldHeader, Vec<f64>), FieldError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: KFieldHeader = serde_json::from_str(line.trim_end()).map_err(|e| FieldError::Format(e.to_string()))?;
    if header.format != "kfield" {
        return Err(FieldError::Format(format!("unexpected format tag {:?}", header.format)));
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let count = header.n_cells * header.n_nodes;
    if bytes.len() != 8 * count {
        return Err(FieldError::Format(format!("payload has {} bytes, expected {}", bytes.len(), 8 * count)));
    }
    let data = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
    Ok((header, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_state::maxwellian::maxwellian_speed;
    use crate::geometry::Domain;
    use std::f64::consts::PI;

    fn setup() -> (Arc<VelocityGrid>, Arc<SpatialMesh>) {
        let grid = Arc::new(VelocityGrid::new(GridSpec { v_max: 6.0, n_per_axis: 16 }).unwrap());
        let mesh = Arc::new(SpatialMesh::new(&Domain::ball(1.0), MeshSpec { n_per_axis: 6, subsamples: 4 }).unwrap());
        (grid, mesh)
    }

    #[test]
    fn zero_field_norms_vanish() {
        let (g, m) = setup();
        let f = DistributionField::zeros(g, m);
        assert_eq!(f.weighted_sup_norm(&Weight::Polynomial { k: 8.0 }), 0.0);
        assert_eq!(f.total_mass(), 0.0);
    }

    #[test]
    fn maxwellian_weight_inverts_mu() {
        let (g, m) = setup();
        let f = DistributionField::maxwellian(g, m);
        let n = f.weighted_sup_norm(&Weight::MaxwellianPower { zeta: 1.0 - 1e-15 });
        assert!((n - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomial_weight_matches_radial_maximum() {
        let (g, m) = setup();
        let f = DistributionField::maxwellian(g.clone(), m);
        let k = 6.0;
        let got = f.weighted_sup_norm(&Weight::Polynomial { k });
        // The radial profile (1 + r^k) mu(r) peaks near r = sqrt(k); the grid samples a subset.
        let oracle = (0..60_000).map(|i| i as f64 * 1e-4).map(|r| (1.0 + r.powf(k)) * maxwellian_speed(r)).fold(0.0, f64::max);
        assert!(got <= oracle * (1.0 + 1e-12));
        assert!(got > 0.95 * oracle);
    }

    #[test]
    fn mass_of_maxwellian_is_volume_times_grid_mass() {
        let (g, m) = setup();
        let f = DistributionField::maxwellian(g.clone(), m.clone());
        let expected = m.total_volume() * (1.0 - g.mass_defect());
        assert!((f.total_mass() - expected).abs() < 1e-12);
        assert!((m.total_volume() - 4.0 * PI / 3.0).abs() < 0.1);
    }

    #[test]
    fn kfield_round_trip() {
        let (g, m) = setup();
        let f = DistributionField::from_fn(g.clone(), m.clone(), |x, v| x.x * v.y + 0.25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.kfield");
        f.write_kfield(&path, 1.5).unwrap();
        let (h, back) = DistributionField::read_kfield(&path, g, m).unwrap();
        assert_eq!(h.time, 1.5);
        assert_eq!(back.values(), f.values());
    }
}
