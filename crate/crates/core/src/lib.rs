//! Numerical laboratory for the Boltzmann equation near a global Maxwellian in a
//! smooth bounded domain with Maxwell (specular + diffuse) wall reflection.
//!
//! Layout follows the physics pipeline:
//!
//! * [`geometry`]: domains, outward normals, backward exit times, boundary classes.
//! * [`characteristics`]: specular backward trajectories and the continuity set.
//! * [`gas_state`]: Maxwellian, weights, velocity grid, spatial mesh, fields, norms.
//! * [`collision`]: collision kernel, frequency, bilinear operator, compact part.
//! * [`linear_ops`]: linearized operator, projections, mollified splitting, spectrum,
//!   closed-form constants.
//! * [`transport_semigroup`]: branching-path Monte Carlo for the free transport
//!   semigroup with wall reflection, its truncated enumeration, path statistics.
//! * [`solver`]: grid propagator and the nonlinear iteration schemes.
//! * [`harness`]: configuration, run orchestration, acceptance checks.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod collision;
pub mod gas_state;
pub mod geometry;
pub mod harness;
pub mod linear_ops;
pub mod quadrature;
pub mod solver;
pub mod transport_semigroup;

/// Three-vector used for positions and velocities.
pub type Vec3 = nalgebra::Vector3<f64>;
