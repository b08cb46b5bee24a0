//! Free transport semigroup with Maxwell walls: branching-path Monte Carlo against the truncated
//! deterministic enumeration at one phase point.
//!
//! `cargo run --release --example semigroup_monte_carlo`

use kinetic_maxwell::collision::CollisionModel;
use kinetic_maxwell::gas_state::maxwellian;
use kinetic_maxwell::geometry::Domain;
use kinetic_maxwell::transport_semigroup::{enumerate_ip_rp, DiffuseRule, PathSampler};
use kinetic_maxwell::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::ball(1.0);
    let model = CollisionModel::hard_spheres();
    let f0 = |x: &Vec3, v: &Vec3| (1.0 - x.norm_squared()).max(0.0) * maxwellian(v) * (1.0 + 0.3 * v.x);
    let (x, v, t) = (Vec3::new(0.7, 0.1, -0.2), Vec3::new(-0.8, -0.3, 0.2), 0.6);
    let rules = DiffuseRule::standard_levels();
    for alpha in [1.0, 0.9] {
        let sampler = PathSampler::new(&domain, &model, alpha)?.with_seed(11);
        for p in 1..=2 {
            let exact = enumerate_ip_rp(&sampler, t, &x, &v, p, &f0, &rules)?;
            let mc = sampler.estimate(t, &x, &v, &f0, 50_000, 0, Some(p))?;
            println!(
                "alpha {alpha} p {p}: enumeration {:.6e}  Monte Carlo {:.6e} +- {:.1e}  z {:+.2}",
                exact.ip,
                mc.value,
                mc.stderr,
                (mc.value - exact.ip) / mc.stderr
            );
        }
    }
    Ok(())
}
