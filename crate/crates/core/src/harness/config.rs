//! Run configuration: one TOML file, every table optional, validated before any compute.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::collision::{CollisionModel, CollisionSpec};
use crate::gas_state::{GridSpec, MeshSpec, SpatialMesh, VelocityGrid, Weight};
use crate::geometry::{Domain, ShapeSpec};
use crate::solver::SolverConfig;

/// Accommodation below this value is outside the contraction regime: accepted with a warning.
pub fn alpha_threshold() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub alpha: f64,
    pub output: PathBuf,
    pub domain: ShapeSpec,
    pub collision: CollisionSpec,
    pub weight: Weight,
    pub grid: GridSpec,
    pub mesh: MeshSpec,
    pub solver: SolverConfig,
    pub simulate: SimulateConfig,
    pub trace: TraceConfig,
    pub paths: PathsConfig,
    pub spectrum: SpectrumConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            alpha: 0.9,
            output: PathBuf::from("out"),
            domain: ShapeSpec::default(),
            collision: CollisionSpec::hard_spheres().with_quadrature(4, 4),
            weight: Weight::default(),
            grid: GridSpec { v_max: 3.6, n_per_axis: 6 },
            mesh: MeshSpec { n_per_axis: 3, subsamples: 3 },
            solver: SolverConfig::default(),
            simulate: SimulateConfig::default(),
            trace: TraceConfig::default(),
            paths: PathsConfig::default(),
            spectrum: SpectrumConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Perturbed,
    Positivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub scheme: Scheme,
    /// Amplitude of the standard bump `a psi(x) v_x mu(v)`.
    pub amplitude: f64,
    /// Times at which `.kfield` snapshots of `F` are written.
    pub snapshot_times: Vec<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { scheme: Scheme::Perturbed, amplitude: 0.05, snapshot_times: vec![0.0, 1.0, 2.0, 4.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub x: [f64; 3],
    pub v: [f64; 3],
    pub t: f64,
    pub max_rebounds: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { x: [0.0; 3], v: [1.0, 0.0, 0.0], t: 5.0, max_rebounds: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub t0: f64,
    pub samples: usize,
    pub p_max: usize,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self { t0: 1.0, samples: 100_000, p_max: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_per_axis: usize,
    pub v_max: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { n_per_axis: 12, v_max: 5.0, n_theta: 8, n_phi: 8 }
    }
}

/// The validated pieces a command builds on.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub domain: Domain,
    pub model: CollisionModel,
    pub solver: SolverConfig,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Solver settings with the run's norm weight.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { weight: self.weight, ..self.solver.clone() }
    }

    /// Every range check that does not need a computation.
    pub fn validate(&self) -> Result<Resolved, HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        let mut warnings = Vec::new();
        if self.alpha <= alpha_threshold() {
            warnings.push(format!(
                "alpha = {} is at or below sqrt(2/3) = {:.6}: outside the contraction regime",
                self.alpha,
                alpha_threshold()
            ));
        }
        let domain = Domain::from_spec(&self.domain).map_err(|e| HarnessError::Config(format!("domain: {e}")))?;
        let model = CollisionModel::new(self.collision).map_err(|e| HarnessError::Config(format!("collision: {e}")))?;
        self.weight.check_admissible(model.k_inf()).map_err(|e| HarnessError::Config(format!("weight: {e}")))?;
        VelocityGrid::new(self.grid).map_err(|e| HarnessError::Config(format!("grid: {e}")))?;
        if self.mesh.n_per_axis < 2 || self.mesh.subsamples == 0 {
            return bad("mesh needs n_per_axis >= 2 and subsamples >= 1".into());
        }
        let solver = self.solver_config();
        solver.validate().map_err(|e| HarnessError::Config(format!("solver: {e}")))?;
        if !(self.simulate.amplitude.is_finite()) || self.simulate.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            return bad("simulate: amplitude must be finite and snapshot times nonnegative".into());
        }
        if !(self.trace.t >= 0.0) || self.trace.v.iter().all(|c| *c == 0.0) {
            return bad("trace: t must be nonnegative and v nonzero".into());
        }
        if !(self.paths.t0 > 0.0) || self.paths.samples == 0 {
            return bad("paths: t0 and samples must be positive".into());
        }
        if self.spectrum.n_per_axis < 2 || !(self.spectrum.v_max > 0.0) {
            return bad("spectrum: n_per_axis >= 2 and v_max > 0 required".into());
        }
        Ok(Resolved { domain, model, solver, warnings })
    }

    pub fn grid(&self) -> Result<std::sync::Arc<VelocityGrid>, HarnessError> {
        VelocityGrid::new(self.grid).map(std::sync::Arc::new).map_err(|e| HarnessError::Config(format!("grid: {e}")))
    }

    pub fn mesh(&self, domain: &Domain) -> Result<std::sync::Arc<SpatialMesh>, HarnessError> {
        SpatialMesh::new(domain, self.mesh).map(std::sync::Arc::new).map_err(|e| HarnessError::Config(format!("mesh: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), c.to_toml());
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let c = RunConfig::from_toml("alpha = 0.95\n[domain]\nshape = \"ellipsoid\"\nsemi_axes = [1.0, 0.8, 0.6]\n").unwrap();
        assert_eq!(c.alpha, 0.95);
        assert_eq!(c.grid, RunConfig::default().grid);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn alpha_two_is_a_config_error() {
        let c = RunConfig { alpha: 2.0, ..Default::default() };
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn small_alpha_only_warns() {
        let c = RunConfig { alpha: 0.5, ..Default::default() };
        assert_eq!(c.validate().unwrap().warnings.len(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("alpah = 0.9\n").is_err());
        assert!(RunConfig::from_toml("[solver]\nweight = 3\n").is_err());
    }

    #[test]
    fn weight_gate_applies() {
        let c = RunConfig { weight: Weight::Polynomial { k: 6.0 }, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
