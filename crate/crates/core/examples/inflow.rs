//! Linear transport with attenuation, source and wall gain: the closed form along the specular
//! characteristic against a fine Runge-Kutta march.
//!
//! `cargo run --release --example inflow`

use kinetic_maxwell::geometry::Domain;
use kinetic_maxwell::solver::{solve_transport_inflow, transport_inflow_rk4, InflowProblem};
use kinetic_maxwell::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ball = Domain::ball(1.0);
    let q1 = |s: f64, y: &Vec3, _: &Vec3| 0.5 + 0.3 * y.x + 0.1 * s;
    let q2 = |s: f64, y: &Vec3, w: &Vec3| (y.y + w.z).sin() + s;
    let g = |s: f64, y: &Vec3, _: &Vec3| 0.3 * (s + y.z).cos();
    let f0 = |x: &Vec3, v: &Vec3| (1.0 + x.x - 0.5 * x.y * x.z) * (1.0 + 0.2 * v.y);
    let problem = InflowProblem { q1: &q1, q2: &q2, f0: &f0, g: &g };
    let (x, v) = (Vec3::new(0.0, 0.3, 0.0), Vec3::new(1.0, 0.0, 0.0));
    for t in [0.5, 2.0, 4.0] {
        let closed = solve_transport_inflow(&ball, 0.3, &problem, t, &x, &v)?;
        let marched = transport_inflow_rk4(&ball, 0.3, &problem, t, &x, &v, 2000)?;
        println!("t {t}: closed form {closed:.8}  marched {marched:.8}  rel {:.1e}", (closed - marched).abs() / marched.abs());
    }
    Ok(())
}
