//! Property tests of the structural invariants across random inputs.

use kinetic_maxwell::characteristics::{reflect_specular, trace_backward, TraceStatus};
use kinetic_maxwell::collision::{post_collision, CollisionModel};
use kinetic_maxwell::gas_state::Weight;
use kinetic_maxwell::geometry::Domain;
use kinetic_maxwell::harness::RunConfig;
use kinetic_maxwell::linear_ops::named_constants;
use kinetic_maxwell::transport_semigroup::{path_rng, sample_diffuse_velocity};
use kinetic_maxwell::Vec3;
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("away from zero", |v| v.norm() > 1e-3).prop_map(|v| v.normalize())
}

fn interior(d: Domain) -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("strictly inside", move |x| d.is_interior(x) && d.level(x) < -1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn specular_reflection_is_an_isometric_involution(n in unit(), v in vec3(5.0)) {
        let r = reflect_specular(&n, &v).unwrap();
        prop_assert!((r.norm() - v.norm()).abs() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!((r.dot(&n) + v.dot(&n)).abs() <= 1e-12 * (1.0 + v.norm()));
        let back = reflect_specular(&n, &r).unwrap();
        prop_assert!((back - v).norm() <= 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn collisions_conserve_momentum_and_energy(v in vec3(4.0), w in vec3(4.0), s in unit()) {
        let (vp, wp) = post_collision(&v, &w, &s).unwrap();
        let scale = 1.0 + v.norm_squared() + w.norm_squared();
        prop_assert!(((vp + wp) - (v + w)).norm() <= 1e-12 * scale);
        prop_assert!((vp.norm_squared() + wp.norm_squared() - v.norm_squared() - w.norm_squared()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn ball_exit_time_matches_the_chord(x in interior(Domain::ball(1.0)), v in vec3(3.0).prop_filter("nonzero", |v| v.norm() > 1e-2)) {
        let d = Domain::ball(1.0);
        let hit = d.backward_exit_time(&x, &v).unwrap();
        let exact = d.analytic_exit_time(&x, &v).unwrap();
        prop_assert!((hit.time - exact).abs() <= 1e-10 * exact);
        prop_assert!(((x - v * hit.time).norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn backward_trajectories_keep_speed_and_order(x in interior(Domain::ellipsoid(1.0, 0.8, 0.6)), v in vec3(2.0).prop_filter("nonzero", |v| v.norm() > 0.1), t in 0.0..4.0f64) {
        let d = Domain::ellipsoid(1.0, 0.8, 0.6);
        let traj = trace_backward(&d, t, &x, &v, 10_000).unwrap();
        prop_assume!(traj.status == TraceStatus::ReachedInitialPlane);
        let mut last = 0.0;
        for fp in &traj.footprints {
            prop_assert!(fp.hit_time > last);
            last = fp.hit_time;
            prop_assert!((fp.post_reflection_velocity.norm() - v.norm()).abs() <= 1e-10 * v.norm());
            prop_assert!(d.level(&fp.hit_point).abs() <= 1e-8);
        }
        prop_assert!(last <= t);
        prop_assert!(d.contains(&traj.terminal) || d.level(&traj.terminal) <= 1e-9);
    }

    #[test]
    fn diffuse_draws_leave_the_wall(n in unit(), seed in any::<u64>()) {
        let mut rng = path_rng(seed, 0, 0);
        for _ in 0..16 {
            prop_assert!(sample_diffuse_velocity(&n, &mut rng).dot(&n) > 0.0);
        }
    }

    #[test]
    fn admissibility_flips_at_the_threshold(alpha in 0.0..=1.0f64) {
        let c = named_constants(&CollisionModel::hard_spheres(), alpha, 1.0, &Weight::default()).unwrap();
        prop_assert_eq!(c.alpha_admissible, c.c_alpha_zeta_limit < 1.0);
        if (alpha - (2.0f64 / 3.0).sqrt()).abs() > 1e-9 {
            prop_assert_eq!(c.alpha_admissible, alpha > (2.0f64 / 3.0).sqrt());
        }
    }

    #[test]
    fn polynomial_weight_gate_is_strict(k in 0.0..12.0f64) {
        prop_assert_eq!(Weight::Polynomial { k }.check_admissible(6.0).is_ok(), k > 6.0);
    }

    #[test]
    fn run_config_round_trips(seed in any::<u64>(), alpha in 0.0..=1.0f64, samples in 1usize..1_000_000) {
        let mut c = RunConfig { seed, alpha, ..Default::default() };
        c.paths.samples = samples;
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }
}
