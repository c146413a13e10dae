//! Built-in scenario presets, mirrored by the bundled files under
//! `configs/`.

use platoon_core::kinematics::{LeaderTrajectory, Pose};
use platoon_core::simulator::{BreachPolicy, InitialTriple};

use crate::config::{Config, InitialLayout, OutputConfig};

fn deg(a: f64) -> f64 {
    a.to_radians()
}

fn base(n: usize, trajectory: LeaderTrajectory, spacing: f64) -> Config {
    Config {
        schema_version: 1,
        n_followers: n,
        dt: 1e-3,
        duration: 60.0,
        integrator: platoon_core::kinematics::Integrator::Rk4,
        breach_policy: BreachPolicy::Halt,
        tail_fraction: 0.25,
        trajectory,
        leader_pose: Pose::new(0.0, 0.0, 0.0),
        camera: platoon_core::geometry::CameraModel {
            range: 2.0,
            aov: deg(90.0),
        },
        constraints: platoon_core::geometry::Constraints {
            d_col: 0.0375,
            d_con: 2.0,
            beta_con: deg(45.0),
        },
        k_d: vec![0.005; n],
        k_beta: vec![0.001; n],
        d_des: vec![0.75; n],
        decay_d: 0.5,
        decay_beta: 0.5,
        rho_inf_d: 0.0625,
        rho_inf_beta: deg(1.15),
        soft_guard: None,
        saturation: None,
        initial: InitialLayout::Triples(vec![
            InitialTriple {
                d: spacing,
                beta: 0.0,
                gamma: 0.0,
            };
            n
        ]),
        output: OutputConfig {
            plot_data: true,
            ..OutputConfig::default()
        },
    }
}

/// Seven followers with the published controller parameters (gains
/// 0.005/0.001, constraints (0.0375 m, 2 m, 45 deg), envelope decay 0.5/s,
/// steady-state widths 0.0625 m / 1.15 deg) behind a slow weaving leader,
/// started at the desired spacing. Runs 60 s with zero envelope violations.
pub fn reference() -> Config {
    base(
        7,
        LeaderTrajectory::SinusoidalOmega {
            v: 0.015,
            amplitude: 0.00375,
            frequency: 0.1,
        },
        0.75,
    )
}

/// Same platoon behind a 0.3 m/s leader, started 1.2 m apart. The distance
/// gain 0.005 can command at most k_d * eps with eps representable only up
/// to ~37 in doubles, i.e. about 0.19 m/s, so the followers cannot hold
/// this leader inside the shrinking envelope: the run halts on a distance
/// envelope breach within ~1.1 s. Bundled as a demonstration of the breach
/// monitor and halt policy.
pub fn fast_leader() -> Config {
    base(
        7,
        LeaderTrajectory::SinusoidalOmega {
            v: 0.3,
            amplitude: 0.2,
            frequency: 0.2,
        },
        1.2,
    )
}
