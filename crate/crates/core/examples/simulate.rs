//! Nonlinear run from a small bump at coarse resolution: perturbative pair and the positivity
//! scheme side by side, with norm, mass and minimum over time.
//!
//! `cargo run --release --example simulate`

use kinetic_maxwell::gas_state::DistributionField;
use kinetic_maxwell::harness::{standard_solver, STANDARD_AMPLITUDE};
use kinetic_maxwell::solver::standard_bump;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let solver = standard_solver()?.with_horizon(1.0)?;
    let (grid, mesh) = (solver.grid().clone(), solver.mesh().clone());
    let f0 = standard_bump(grid.clone(), mesh.clone(), STANDARD_AMPLITUDE);
    let mu = DistributionField::maxwellian(grid, mesh);
    let pair = solver.solve_perturbed(&f0)?;
    let positive = solver.solve_positivity_scheme(&mu.with_values(mu.values() + f0.values()))?;
    let weight = &solver.config().weight;
    let (full, other) = (pair.full(), &positive.series);
    let norms = pair.perturbation().norms(weight);
    let masses = full.masses();
    println!("{} fixed-point iterations", pair.iterations());
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "norm", "mass", "min F", "scheme gap");
    for n in (0..=full.steps()).step_by((full.steps() / 5).max(1)) {
        let gap = (full.values(n) - other.values(n)).abs().max();
        println!("{:>6.2} {:>12.4e} {:>12.6} {:>12.4e} {:>12.2e}", norms[n].0, norms[n].1, masses[n], full.values(n).min(), gap);
    }
    Ok(())
}
