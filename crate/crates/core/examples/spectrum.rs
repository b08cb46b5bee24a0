//! Eigenvalues of the discretized linearized collision operator: five-dimensional kernel and the
//! gap below it.
//!
//! `cargo run --release --example spectrum`

use kinetic_maxwell::collision::{CollisionModel, CollisionSpec};
use kinetic_maxwell::gas_state::{GridSpec, VelocityGrid};
use kinetic_maxwell::linear_ops::spectral_gap_estimate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = CollisionModel::new(CollisionSpec::hard_spheres().with_quadrature(8, 8))?;
    let grid = VelocityGrid::new(GridSpec { v_max: 5.0, n_per_axis: 10 })?;
    let report = spectral_gap_estimate(&model, &grid)?;
    let top: Vec<String> = report.eigenvalues.iter().take(8).map(|e| format!("{e:.3e}")).collect();
    println!("largest eigenvalues: {}", top.join(" "));
    println!("kernel dimension {}  gap {:.4}  (tolerance {:.3e})", report.kernel_dim, report.gap, report.gap_tol);
    println!("asymmetry {:.2e}", report.asymmetry);
    Ok(())
}
