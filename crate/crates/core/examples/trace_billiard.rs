//! Specular backward trajectory in an ellipsoid: footprints, and speed conservation at each wall.
//!
//! `cargo run --release --example trace_billiard`

use kinetic_maxwell::characteristics::trace_backward;
use kinetic_maxwell::geometry::Domain;
use kinetic_maxwell::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::ellipsoid(1.0, 0.8, 0.6);
    let (x, v) = (Vec3::new(0.1, -0.2, 0.05), Vec3::new(0.9, 0.4, -0.3));
    let traj = trace_backward(&domain, 6.0, &x, &v, 1000)?;
    println!("{:>3} {:>9} {:>28} {:>12}", "k", "hit time", "footprint", "speed drift");
    for (k, fp) in traj.footprints.iter().enumerate() {
        let p = fp.hit_point;
        let drift = fp.post_reflection_velocity.norm() - v.norm();
        println!("{:>3} {:>9.5} ({:>8.5},{:>8.5},{:>8.5}) {:>12.2e}", k + 1, fp.hit_time, p.x, p.y, p.z, drift);
    }
    println!("status {:?}, {} rebounds, position at time 0: {:.5?}", traj.status, traj.rebounds(), traj.terminal.as_slice());
    Ok(())
}
