//! Closed-form constants of the hard-sphere model: the accommodation threshold, the moment roots,
//! and the smallest admissible polynomial weight.
//!
//! `cargo run --release --example named_constants`

use kinetic_maxwell::collision::CollisionModel;
use kinetic_maxwell::gas_state::Weight;
use kinetic_maxwell::linear_ops::named_constants;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = CollisionModel::hard_spheres();
    let weight = Weight::default();
    for alpha in [0.5, (2.0f64 / 3.0).sqrt(), 0.9, 1.0] {
        let c = named_constants(&model, alpha, 1.0, &weight)?;
        println!("alpha {alpha:.6}: C_alpha limit {:.6} admissible {}", c.c_alpha_zeta_limit, c.alpha_admissible);
    }
    let c = named_constants(&model, 0.9, 1.0, &weight)?;
    println!("k_inf {:.6}  alpha_a {:.6}  alpha_c {:.6}", c.k_inf, c.alpha_a, c.alpha_c);
    if let Some(cb) = c.c_b_poly_limit {
        println!("weight {weight:?}: C_B limit {cb:.6}");
    }
    Ok(())
}
