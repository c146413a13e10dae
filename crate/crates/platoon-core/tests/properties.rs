//! Property suites: angle wrapping, rigid-motion invariance of the sensing
//! geometry, envelope/transformation identities, control-law structure, and
//! agreement of the two independently coded forms of the error dynamics.

mod common;

use core::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use platoon_core::controller::{angular_velocity, controller_step, linear_velocity};
use platoon_core::envelope::{self, Envelope};
use platoon_core::geometry::{relative_heading, relative_measurement, Measurement};
use platoon_core::kinematics::{wrap_angle, ControlInput, Pose};
use platoon_core::simulator::{error_dynamics_rhs, poses_from_triples, InitialTriple, VectorFormState};

use common::{deg, reference_controller};

fn envelope_strategy() -> impl Strategy<Value = Envelope> {
    (0.05f64..3.0, 0.05f64..3.0, 0.05f64..3.0, 0.01f64..0.95).prop_map(
        |(m_lower, m_upper, decay, frac)| {
            Envelope::new(m_lower, m_upper, decay, frac * m_lower.max(m_upper)).unwrap()
        },
    )
}

/// Normalized error strictly inside the open band, away from the boundary
/// by at least 0.1 % of the nearer bound.
fn xi_inside(env: &Envelope, u: f64) -> f64 {
    if u >= 0.0 {
        u * 0.999 * env.m_upper
    } else {
        u * 0.999 * env.m_lower
    }
}

proptest! {
    #[test]
    fn wrap_angle_lands_in_range_and_is_idempotent(a in -1e6f64..1e6) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        prop_assert_eq!(wrap_angle(w).to_bits(), w.to_bits());
        // congruence modulo 2 pi
        let k = (a - w) / TAU;
        prop_assert!((k - k.round()).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn rigid_motions_leave_relative_geometry_unchanged(
        fx in -10.0f64..10.0, fy in -10.0f64..10.0, fphi in -PI..PI,
        dx in 0.01f64..5.0, dy in -5.0f64..5.0, pphi in -PI..PI,
        shift_x in -50.0f64..50.0, shift_y in -50.0f64..50.0, rot in -PI..PI,
    ) {
        let follower = Pose::new(fx, fy, fphi);
        let predecessor = Pose::new(fx + dx, fy + dy, pphi);
        let apply = |p: Pose| {
            let (s, c) = rot.sin_cos();
            Pose::new(
                c * p.x - s * p.y + shift_x,
                s * p.x + c * p.y + shift_y,
                p.phi + rot,
            )
        };
        let m0 = relative_measurement(follower, predecessor).unwrap();
        let m1 = relative_measurement(apply(follower), apply(predecessor)).unwrap();
        prop_assert!((m0.d - m1.d).abs() < 1e-12 * (1.0 + m0.d));
        prop_assert!(wrap_angle(m0.beta - m1.beta).abs() < 1e-12);
        let g0 = relative_heading(follower, predecessor);
        let g1 = relative_heading(apply(follower), apply(predecessor));
        prop_assert!(wrap_angle(g0 - g1).abs() < 1e-12);
    }

    #[test]
    fn transform_round_trips_through_its_inverse(
        env in envelope_strategy(),
        u in -0.9999f64..0.9999,
    ) {
        let xi = xi_inside(&env, u);
        let eps = envelope::transform(xi, &env).unwrap();
        let back = envelope::inverse_transform(eps, &env);
        prop_assert!(
            (back - xi).abs() <= 1e-12 * xi.abs().max(1e-300),
            "xi = {}, back = {}", xi, back
        );
    }

    #[test]
    fn modulation_is_the_transform_derivative(
        env in envelope_strategy(),
        u in -0.995f64..0.995,
    ) {
        let xi = xi_inside(&env, u) * 0.995;
        let h = 1e-6 * (env.m_lower + env.m_upper);
        // keep the stencil inside the band
        prop_assume!(xi + h < env.m_upper && xi - h > -env.m_lower);
        let fd = (envelope::transform(xi + h, &env).unwrap()
            - envelope::transform(xi - h, &env).unwrap())
            / (2.0 * h);
        let r = envelope::modulation(xi, &env).unwrap();
        prop_assert!((fd - r).abs() <= 1e-6 * r, "fd = {fd}, r = {r}");
    }

    #[test]
    fn envelope_check_equals_transform_domain(
        env in envelope_strategy(),
        e in -5.0f64..5.0,
        t in 0.0f64..40.0,
    ) {
        let in_band = env.check(e, t);
        let xi = envelope::normalize(e, env.rho(t));
        prop_assert_eq!(in_band, envelope::transform(xi, &env).is_ok());
    }

    #[test]
    fn constraint_ok_implies_camera_visible(
        d in 0.001f64..4.0,
        beta in -PI..PI,
        d_con in 0.5f64..2.0,
        extra_range in 0.0f64..1.0,
        beta_frac in 0.1f64..1.0,
        extra_fov in 0.0f64..0.5,
    ) {
        // Whenever d_con <= range and beta_con <= aov/2 (the validated
        // sensor-compatibility condition), a constraint-satisfying
        // measurement is always visible.
        let cam = platoon_core::geometry::CameraModel {
            range: d_con + extra_range,
            aov: 2.0 * (beta_frac * 1.4 + extra_fov).min(1.5),
        };
        let beta_con = (beta_frac * 1.4).min(cam.half_aov());
        let c = platoon_core::geometry::Constraints { d_col: 0.0005, d_con, beta_con };
        let m = Measurement { d, beta };
        if platoon_core::geometry::constraint_status(m, c)
            == platoon_core::geometry::ConstraintStatus::Ok
        {
            prop_assert_eq!(
                platoon_core::geometry::camera_visibility(m, cam),
                platoon_core::geometry::Visibility::Visible
            );
        }
    }

    #[test]
    fn rho_is_monotone_and_bounded(env in envelope_strategy(), t in 0.0f64..50.0) {
        let r = env.rho(t);
        prop_assert!(r > env.rho_floor() * (1.0 - 1e-12));
        prop_assert!(r <= 1.0);
        let later = env.rho(t + 0.5);
        prop_assert!(later <= r);
        // strictly decreasing wherever the decaying term is still resolvable
        if (1.0 - env.rho_floor()) * (-env.decay * t).exp() > 1e-12 * env.rho_floor() {
            prop_assert!(later < r);
        }
        prop_assert!(env.rho_dot(t) <= 0.0);
    }

    #[test]
    fn control_gain_scaling_is_linear(
        e_d in -0.6f64..1.1,
        e_b in -0.7f64..0.7,
        t in 0.0f64..5.0,
        alpha in 0.01f64..100.0,
    ) {
        let p = reference_controller();
        prop_assume!(p.env_d.check(e_d, t) && p.env_beta.check(e_b, t));
        let v = linear_velocity(e_d, t, &p).unwrap();
        let w = angular_velocity(e_b, t, &p).unwrap();
        let mut scaled = p.clone();
        scaled.k_d *= alpha;
        scaled.k_beta *= alpha;
        let v2 = linear_velocity(e_d, t, &scaled).unwrap();
        let w2 = angular_velocity(e_b, t, &scaled).unwrap();
        prop_assert!((v2 - alpha * v).abs() <= 4.0 * f64::EPSILON * (alpha * v).abs());
        prop_assert!((w2 - alpha * w).abs() <= 4.0 * f64::EPSILON * (alpha * w).abs());
    }
}

#[test]
fn controls_are_bounded_on_compact_sub_bands() {
    // Confine the errors to 90 % of each envelope: the commands never exceed
    // gain * transformed-error (and its modulated analogue) at the band edge.
    let p = reference_controller();
    for t in [0.0, 0.5, 2.0, 10.0, 40.0] {
        let rho_d = p.env_d.rho(t);
        let rho_b = p.env_beta.rho(t);
        let xi_d_max = 0.9 * p.env_d.m_upper;
        let xi_d_min = -0.9 * p.env_d.m_lower;
        let eps_edge = envelope::transform(xi_d_max, &p.env_d)
            .unwrap()
            .abs()
            .max(envelope::transform(xi_d_min, &p.env_d).unwrap().abs());
        let v_bound = p.k_d * eps_edge;
        let xi_b_max: f64 = 0.9 * p.env_beta.m_upper;
        let r_edge = envelope::modulation(xi_b_max, &p.env_beta).unwrap();
        let eps_b_edge = envelope::transform(xi_b_max, &p.env_beta).unwrap().abs();
        let w_bound = p.k_beta * r_edge * eps_b_edge / rho_b;
        for k in -20i32..=20 {
            let frac = k as f64 / 20.0;
            let e_d = if frac >= 0.0 {
                frac * xi_d_max * rho_d
            } else {
                -frac * xi_d_min * rho_d
            };
            let e_b = frac * xi_b_max * rho_b;
            let v = linear_velocity(e_d, t, &p).unwrap();
            let w = angular_velocity(e_b, t, &p).unwrap();
            assert!(v.abs() <= v_bound * (1.0 + 1e-12), "t={t} frac={frac}");
            assert!(w.abs() <= w_bound * (1.0 + 1e-12), "t={t} frac={frac}");
        }
    }
}

#[test]
fn controls_are_continuous_across_a_fine_grid() {
    // No jumps beyond a Lipschitz-style bound between adjacent samples on
    // the open region.
    let p = reference_controller();
    let t = 1.0;
    let rho_d = p.env_d.rho(t);
    let n = 4000;
    let lo = -0.98 * p.env_d.m_lower * rho_d;
    let hi = 0.98 * p.env_d.m_upper * rho_d;
    let step = (hi - lo) / n as f64;
    let mut prev = linear_velocity(lo, t, &p).unwrap();
    for k in 1..=n {
        let e = lo + step * k as f64;
        let v = linear_velocity(e, t, &p).unwrap();
        // local slope bound: k_d * r(xi)/rho at the steeper endpoint
        let xi = envelope::normalize(e, rho_d);
        let slope = p.k_d * envelope::modulation(xi, &p.env_d).unwrap() / rho_d;
        assert!(
            (v - prev).abs() <= 4.0 * slope * step,
            "jump at e = {e}: {prev} -> {v}"
        );
        prev = v;
    }
}

#[test]
fn two_controllers_with_identical_inputs_agree_bitwise() {
    let p = reference_controller();
    let q = reference_controller();
    let m = Measurement { d: 0.97, beta: 0.12 };
    let a = controller_step(m, 3.3, &p).unwrap().control;
    let b = controller_step(m, 3.3, &q).unwrap().control;
    assert_eq!(a.v.to_bits(), b.v.to_bits());
    assert_eq!(a.omega.to_bits(), b.omega.to_bits());
}

/// Random admissible platoon state: poses built from in-constraint relative
/// triples, bounded random controls.
fn random_state(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Pose>, Vec<ControlInput>) {
    let leader = Pose::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-PI..PI),
    );
    let triples: Vec<_> = (0..n)
        .map(|_| InitialTriple {
            d: rng.random_range(0.1..1.9),
            beta: rng.random_range(-0.99..0.99) * deg(45.0),
            gamma: rng.random_range(-1.2..1.2),
        })
        .collect();
    let mut poses = vec![leader];
    poses.extend(poses_from_triples(leader, &triples));
    let inputs: Vec<_> = (0..=n)
        .map(|_| ControlInput::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
        .collect();
    (poses, inputs)
}

#[test]
fn stacked_and_scalar_dynamics_agree_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for n in [1usize, 2, 3, 8] {
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let (poses, inputs) = random_state(&mut rng, n);
            let scalar = error_dynamics_rhs(&poses, &inputs).unwrap();
            let d_des = vec![0.75; n];
            let stacked = VectorFormState::build(&poses, &inputs, &d_des).unwrap();
            let (dd, bb) = stacked.rhs();
            for i in 0..n {
                worst = worst
                    .max((dd[i] - scalar[i].d_dot).abs())
                    .max((bb[i] - scalar[i].beta_dot).abs());
            }
        }
        assert!(worst <= 1e-12, "N = {n}: worst disagreement {worst:.3e}");
    }
}

#[test]
fn straight_line_integration_is_exact_for_any_heading() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let pose = Pose::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-PI..PI),
        );
        let v = rng.random_range(-1.0..1.0);
        let dt = rng.random_range(1e-4..0.5);
        for method in [
            platoon_core::kinematics::Integrator::Euler,
            platoon_core::kinematics::Integrator::Rk4,
        ] {
            let p = platoon_core::kinematics::integrate_step(
                pose,
                ControlInput::new(v, 0.0),
                dt,
                method,
            );
            let ex = pose.x + v * dt * pose.phi.cos();
            let ey = pose.y + v * dt * pose.phi.sin();
            assert!((p.x - ex).abs() <= 1e-15 * (1.0 + ex.abs()));
            assert!((p.y - ey).abs() <= 1e-15 * (1.0 + ey.abs()));
            assert_eq!(p.phi.to_bits(), pose.phi.to_bits());
        }
    }
}
