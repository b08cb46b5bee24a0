//! A run configuration from TOML: defaults fill missing tables, validation rejects bad ranges,
//! and the resolved file round-trips.
//!
//! `cargo run --release --example run_config`

use kinetic_maxwell::harness::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::from_toml("alpha = 0.8\n[domain]\nshape = \"ellipsoid\"\nsemi_axes = [1.0, 0.8, 0.6]\n")?;
    let resolved = config.validate()?;
    for w in &resolved.warnings {
        println!("warning: {w}");
    }
    println!("{}", config.to_toml());
    match RunConfig::from_toml("alpha = 2.0\n")?.validate() {
        Err(e) => println!("alpha = 2 rejected: {e} (exit code {})", e.exit_code()),
        Ok(_) => println!("alpha = 2 accepted"),
    }
    Ok(())
}
