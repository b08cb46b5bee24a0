//! Linearized operator tooling: kernel projections, the global mass projection, the diffuse wall
//! projections, the mollified `A / B2` splitting, the discrete spectrum of `L`, and the closed
//! form constants that gate the admissible parameters.

mod constants;
mod mollifier;
mod projections;
mod spectrum;

use thiserror::Error;

pub use crate::gas_state::KernelBasis;
pub use constants::{k_weighted_ratio, moment_root, named_constants, NamedConstants};
pub use mollifier::{b2_norm_proxy, split_ab, MollifierSpec};
pub use projections::{pi_g, pi_g_normalization, pi_l, pi_l_perp, WallProjection};
pub use spectrum::{spectral_gap_estimate, SpectrumReport, ASYMMETRY_TOL, SPECTRAL_MAX_N};

#[derive(Debug, Error)]
pub enum LinearOpsError {
    #[error("point {0:?} is not on the boundary")]
    NotOnBoundary([f64; 3]),
    #[error("grid with {0} nodes per axis is too large for a dense eigensolve (max {SPECTRAL_MAX_N})")]
    GridTooLarge(usize),
    #[error("{name} = {value} is outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}
