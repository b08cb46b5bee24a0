//! The closed-form acceptance checks through the library, one line each.
//!
//! `cargo run --release --example verify_constants`

use kinetic_maxwell::harness::run_verify_with;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = run_verify_with(Some("constants,geometry,inflow"), |r| println!("{}", r.line()))?;
    println!("{}", if report.passed { "all selected checks pass" } else { "some checks failed" });
    Ok(())
}
