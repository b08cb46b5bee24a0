//! Loss of path memory: fraction of Maxwell-wall paths still rebounding after `p` rebounds, for
//! pure specular walls and for partial accommodation.
//!
//! `cargo run --release --example path_memory`

use kinetic_maxwell::collision::CollisionModel;
use kinetic_maxwell::geometry::Domain;
use kinetic_maxwell::solver::estimate_decay_rate;
use kinetic_maxwell::transport_semigroup::{remaining_mass_study, PathSampler};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::ball(1.0);
    let model = CollisionModel::hard_spheres();
    for alpha in [1.0, 0.85] {
        let sampler = PathSampler::new(&domain, &model, alpha)?.with_seed(3);
        let rows = remaining_mass_study(&sampler, 1.0, 20_000, 6)?;
        let table: Vec<String> = rows.iter().map(|r| format!("{}:{:.4}", r.p, r.survival)).collect();
        let fit: Vec<(f64, f64)> = rows.iter().filter(|r| r.survival > 0.0).map(|r| (r.p as f64, r.survival)).collect();
        println!("alpha {alpha}: {}  rate per rebound {:.3}", table.join(" "), estimate_decay_rate(&fit)?.lambda_hat);
    }
    Ok(())
}
