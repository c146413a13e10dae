//! Shared scenario builders for the integration tests.

// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use core::f64::consts::PI;

use platoon_core::controller::ControllerParams;
use platoon_core::envelope::Envelope;
use platoon_core::geometry::{CameraModel, Constraints};
use platoon_core::kinematics::{Integrator, LeaderTrajectory, Pose};
use platoon_core::simulator::{poses_from_triples, BreachPolicy, InitialTriple, Scenario};

pub fn deg(a: f64) -> f64 {
    a * PI / 180.0
}

/// Controller with the reference gains and envelopes:
/// constraints (0.0375 m, 2 m, 45 deg), d_des 0.75 m, decay 0.5/s,
/// steady-state widths 0.0625 m and 1.15 deg, gains 0.005 / 0.001.
pub fn reference_controller() -> ControllerParams {
    ControllerParams::new(
        0.005,
        0.001,
        0.75,
        Envelope::new(0.7125, 1.25, 0.5, 0.0625).unwrap(),
        Envelope::new(deg(45.0), deg(45.0), 0.5, deg(1.15)).unwrap(),
    )
}

pub fn reference_constraints() -> Constraints {
    Constraints::new(0.0375, 2.0, deg(45.0)).unwrap()
}

pub fn reference_camera() -> CameraModel {
    CameraModel::new(2.0, deg(90.0)).unwrap()
}

/// Collinear platoon at uniform spacing behind a leader at the origin.
pub fn collinear_scenario(
    n: usize,
    spacing: f64,
    trajectory: LeaderTrajectory,
    duration: f64,
) -> Scenario {
    let leader = Pose::new(0.0, 0.0, 0.0);
    let triples: Vec<_> = (0..n)
        .map(|_| InitialTriple {
            d: spacing,
            beta: 0.0,
            gamma: 0.0,
        })
        .collect();
    Scenario {
        trajectory,
        leader_pose: leader,
        follower_poses: poses_from_triples(leader, &triples),
        controllers: std::iter::repeat_with(reference_controller).take(n).collect(),
        constraints: reference_constraints(),
        camera: reference_camera(),
        dt: 1e-3,
        duration,
        integrator: Integrator::Rk4,
        breach_policy: BreachPolicy::Halt,
        tail_fraction: 0.25,
    }
}

/// The clean reference run: equilibrium start, slow weaving leader.
/// Stays strictly inside both envelopes for the whole 60 s.
pub fn reference_trajectory() -> LeaderTrajectory {
    LeaderTrajectory::SinusoidalOmega {
        v: 0.015,
        amplitude: 0.00375,
        frequency: 0.1,
    }
}
