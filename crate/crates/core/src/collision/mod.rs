//! Collision kernel, post-collision velocities, collision frequency, the bilinear operator with
//! its gain/loss split, and the compact part `K` of the linearized operator.

mod kernel;
mod operators;

pub use kernel::{
    angular_mass, k_inf_from, post_collision, Angular, CollisionError, CollisionModel, CollisionSpec, FrequencyTable,
    SphereQuadrature,
};
pub use operators::CollisionSample;

/// Declared tolerance for equilibrium residuals: `1e-2 nu(v) (16 / n)` at `n` nodes per axis.
pub fn equilibrium_tolerance(nu: f64, n_per_axis: usize) -> f64 {
    1e-2 * nu * 16.0 / n_per_axis as f64
}
