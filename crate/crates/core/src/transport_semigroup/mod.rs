//! The transport semigroup with collision-frequency damping under Maxwell boundary conditions.
//!
//! Values are computed by backward branching paths: free flights attenuated by `exp(-nu s)`,
//! and at each wall hit either a specular reflection (probability `1 - alpha`) or a diffuse
//! re-emission drawn from the wall flux law (probability `alpha`). Working with `f / mu` makes
//! the diffuse branch weight exactly one, since `mu` is invariant under both wall laws.
//! Exact enumeration of the reflection patterns for up to three rebounds serves as the oracle.

mod enumerate;
mod paths;
mod sampling;
mod study;

use thiserror::Error;

use crate::gas_state::{maxwellian, DistributionField, Interp};
use crate::geometry::GeometryError;
use crate::Vec3;

pub use enumerate::{enumerate_ip_rp, DiffuseRule, Enumeration, MAX_ENUMERATION_DEPTH};
pub use paths::{
    apply_semigroup, DampedBoundary, PathEnd, PathOutcome, PathSampler, PointEstimate, ReflectionPattern, SemigroupStats,
};
pub use sampling::{path_rng, rayleigh_chi_square, sample_diffuse_velocity, BoundarySamplingMeasure};
pub use study::{duhamel_point, duhamel_time_integral, remaining_mass_study, SurvivalRow};

/// Largest tolerated fraction of paths discarded at the grazing set.
pub const GRAZING_BUDGET: f64 = 0.01;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("weight violates the semigroup hypotheses for gamma = {0}")]
    AdmissibilityViolation(f64),
    #[error("{grazing} grazing resamples for {paths} paths exceeds the 1% budget")]
    GrazingBudgetExceeded { grazing: usize, paths: usize },
    #[error("enumeration supports p <= {MAX_ENUMERATION_DEPTH}, got {0}")]
    PTooLarge(usize),
    #[error("accommodation alpha = {0} must lie in [0, 1]")]
    BadAlpha(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A phase-space function `f(x, v)` that paths can read at their terminal point.
pub trait PhaseFunction: Sync {
    fn value(&self, x: &Vec3, v: &Vec3) -> f64;

    /// `f / mu`, with `0` where `mu` underflows.
    fn ratio(&self, x: &Vec3, v: &Vec3) -> f64 {
        let m = maxwellian(v);
        if m > 0.0 {
            self.value(x, v) / m
        } else {
            0.0
        }
    }
}

impl<F: Fn(&Vec3, &Vec3) -> f64 + Sync> PhaseFunction for F {
    fn value(&self, x: &Vec3, v: &Vec3) -> f64 {
        self(x, v)
    }
}

impl PhaseFunction for DistributionField {
    fn value(&self, x: &Vec3, v: &Vec3) -> f64 {
        self.eval(x, v, Interp::Ratio)
    }
}
