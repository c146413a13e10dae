//! Planar unicycle kinematics, leader velocity profiles, and fixed-step
//! integration.
//!
//! All angles are in radians and wrapped to `(-pi, pi]`. Every function here
//! is a pure map of its arguments, so concurrent evaluation needs no
//! coordination.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

/// Wraps an angle to the half-open interval `(-pi, pi]`.
///
/// The result is congruent to the input modulo 2*pi; the boundary maps to
/// `+pi`. Inputs must be finite; NaN propagates.
pub fn wrap_angle(a: f64) -> f64 {
    // `%` on f64 is IEEE remainder-toward-zero, which is exact, so values
    // already in range pass through bitwise unchanged.
    let r = a % TAU;
    let r = if r < 0.0 { r + TAU } else { r };
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Planar position and heading of one vehicle.
///
/// `phi` is kept in `(-pi, pi]` by every constructor and integrator in this
/// crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// World-frame x position (m).
    pub x: f64,
    /// World-frame y position (m).
    pub y: f64,
    /// Heading (rad), wrapped to `(-pi, pi]`.
    pub phi: f64,
}

impl Pose {
    /// Builds a pose, wrapping the heading into range.
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: wrap_angle(phi),
        }
    }
}

/// Commanded linear and angular velocity of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    /// Linear velocity (m/s).
    pub v: f64,
    /// Angular velocity (rad/s).
    pub omega: f64,
}

impl ControlInput {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.omega.is_finite()
    }
}

/// Time derivative of a pose under a control input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRate {
    pub dx: f64,
    pub dy: f64,
    pub dphi: f64,
}

/// Unicycle model: `(dx, dy, dphi) = (v cos phi, v sin phi, omega)`.
pub fn unicycle_derivative(pose: Pose, input: ControlInput) -> PoseRate {
    PoseRate {
        dx: input.v * libm::cos(pose.phi),
        dy: input.v * libm::sin(pose.phi),
        dphi: input.omega,
    }
}

/// Fixed-step integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

/// Advances a pose one step of size `dt` under a zero-order-held input.
///
/// `dt` must be positive; the heading of the result is re-wrapped to
/// `(-pi, pi]`.
pub fn integrate_step(pose: Pose, input: ControlInput, dt: f64, method: Integrator) -> Pose {
    debug_assert!(dt > 0.0, "integration step must be positive");
    match method {
        Integrator::Euler => {
            let k = unicycle_derivative(pose, input);
            Pose::new(pose.x + dt * k.dx, pose.y + dt * k.dy, pose.phi + dt * k.dphi)
        }
        Integrator::Rk4 => {
            let stage = |p: Pose, k: PoseRate, h: f64| Pose {
                x: p.x + h * k.dx,
                y: p.y + h * k.dy,
                phi: p.phi + h * k.dphi,
            };
            let k1 = unicycle_derivative(pose, input);
            let k2 = unicycle_derivative(stage(pose, k1, 0.5 * dt), input);
            let k3 = unicycle_derivative(stage(pose, k2, 0.5 * dt), input);
            let k4 = unicycle_derivative(stage(pose, k3, dt), input);
            Pose::new(
                pose.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
                pose.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
                pose.phi + dt / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi),
            )
        }
    }
}

/// One piece of a piecewise-constant leader command schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSegment {
    /// Time at which this segment takes effect (s).
    pub t_start: f64,
    pub v: f64,
    pub omega: f64,
}

/// Velocity profile of the uncontrolled lead vehicle.
///
/// All three kinds produce bounded `(v0(t), omega0(t))` for finite
/// parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderTrajectory {
    /// Fixed `(v, omega)` for all time.
    Constant { v: f64, omega: f64 },
    /// Piecewise-constant schedule; the last segment is held beyond its
    /// span. Segments must be sorted by `t_start` with the first at 0.
    Schedule { segments: Vec<ScheduleSegment> },
    /// Constant linear speed with `omega0(t) = amplitude * sin(frequency * t)`.
    SinusoidalOmega {
        v: f64,
        amplitude: f64,
        frequency: f64,
    },
}

/// Leader command at time `t >= 0`; deterministic in `t`.
pub fn leader_command(traj: &LeaderTrajectory, t: f64) -> ControlInput {
    match traj {
        LeaderTrajectory::Constant { v, omega } => ControlInput::new(*v, *omega),
        LeaderTrajectory::Schedule { segments } => {
            let mut current = segments.first().copied().unwrap_or(ScheduleSegment {
                t_start: 0.0,
                v: 0.0,
                omega: 0.0,
            });
            for seg in segments {
                if seg.t_start <= t {
                    current = *seg;
                } else {
                    break;
                }
            }
            ControlInput::new(current.v, current.omega)
        }
        LeaderTrajectory::SinusoidalOmega {
            v,
            amplitude,
            frequency,
        } => ControlInput::new(*v, amplitude * libm::sin(frequency * t)),
    }
}
