//! Grid propagator and the nonlinear iteration schemes.

mod decay;
mod inflow;
mod ops;
mod propagator;
mod schemes;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gas_state::Weight;

pub use decay::{estimate_decay_rate, DecayFit};
pub use inflow::{solve_transport_inflow, transport_inflow_rk4, InflowProblem};
pub use ops::CollisionOps;
pub use propagator::{discrete_c_mu, Propagator, MAX_STEP_REBOUNDS};
pub use schemes::{bump_profile, standard_bump, F1Solution, FieldSeries, PositivityRun, RunSummary, SolutionPair, Solver};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("no convergence within {0} outer iterations")]
    NoConvergence(usize),
    #[error("{what} has weighted norm {norm:.3e} above the smallness budget eta = {eta:.3e}")]
    SmallnessViolated { what: &'static str, norm: f64, eta: f64 },
    #[error("initial perturbation carries mass {0:.3e}; the perturbative scheme needs zero")]
    NonzeroMass(f64),
    #[error("negative value {value:.3e} at t = {time}")]
    NegativeValueDetected { time: f64, value: f64 },
    #[error("grazing characteristic met at t = {0}")]
    GrazingEncountered(f64),
    #[error("decay fit needs at least 4 samples with positive norms ({0} usable)")]
    InsufficientData(usize),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Cut-off parameter of the `A / B2` splitting.
    pub delta: f64,
    /// Maxwellian power of the weight used for `f2` reports.
    pub zeta: f64,
    pub dt: f64,
    pub horizon: f64,
    pub max_outer_iter: usize,
    /// Fixed-point tolerance in the weighted sup-norm.
    pub fp_tol: f64,
    /// Smallness budget for the data in the weighted sup-norm.
    pub eta: f64,
    /// Norm weight; a run config sets it from its top-level `weight` table.
    #[serde(skip)]
    pub weight: Weight,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            zeta: 0.75,
            dt: 0.01,
            horizon: 4.0,
            max_outer_iter: 30,
            fp_tol: 1e-6,
            eta: 1.0,
            weight: Weight::default(),
        }
    }
}

impl SolverConfig {
    /// Coarse time step used by the test suite.
    pub fn test_resolution() -> Self {
        Self { dt: 0.05, ..Self::default() }
    }

    /// Checks the ranges and returns the number of steps.
    pub fn validate(&self) -> Result<usize, SolverError> {
        let bad = |m: String| Err(SolverError::BadConfig(m));
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return bad(format!("dt and horizon must be positive (dt = {}, horizon = {})", self.dt, self.horizon));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad(format!("delta = {} outside (0, 1/2)", self.delta));
        }
        if !(self.zeta > 0.5 && self.zeta < 1.0) {
            return bad(format!("zeta = {} outside (1/2, 1)", self.zeta));
        }
        if !(self.fp_tol > 0.0 && self.eta > 0.0) || self.max_outer_iter == 0 {
            return bad("fp_tol, eta and max_outer_iter must be positive".into());
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return bad(format!("horizon {} is not a multiple of dt {}", self.horizon, self.dt));
        }
        Ok(steps as usize)
    }
}
