//! Equilibrium, weights, discretized phase space and the quantities measured on it.

pub mod field;
pub mod grid;
pub mod maxwellian;
pub mod mesh;
pub mod moments;
pub mod weight;

pub use field::{DistributionField, FieldError, KFieldHeader};
pub use grid::{GridError, GridSpec, Interp, Stencil, VelocityGrid};
pub use maxwellian::{c_mu, half_space_flux, maxwellian, maxwellian_speed, HalfSpaceQuadrature, MU_PREFACTOR};
pub use mesh::{Cell, MeshError, MeshSpec, MeshStencil, SpatialMesh};
pub use moments::{HydrodynamicMoments, KernelBasis};
pub use weight::{Weight, WeightError};
