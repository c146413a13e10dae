//! The decentralized per-vehicle control law.
//!
//! Each follower maps its own `(distance, bearing)` measurement and the
//! current time to a velocity command using nothing else: no predecessor
//! velocity, no leader state, no neighbor data. That locality is enforced
//! structurally by the signatures here, and statelessness (all time
//! dependence enters through the performance functions) makes every call
//! bitwise reproducible.

use core::fmt;

use crate::envelope::{self, Channel, Envelope, EnvelopeBreach};
use crate::geometry::Measurement;
use crate::kinematics::ControlInput;

/// Optional velocity-magnitude diagnostic.
///
/// The law itself is unbounded near the envelope edge; real actuators are
/// not. When configured, outputs beyond the limits are flagged (and only
/// clamped when `clamp` is set, for what-if studies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    pub v_max: f64,
    pub omega_max: f64,
    pub clamp: bool,
}

/// Per-vehicle gains, target spacing, and envelope pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Distance-channel gain (m/s per unit transformed error), > 0.
    pub k_d: f64,
    /// Bearing-channel gain, > 0.
    pub k_beta: f64,
    /// Desired distance to the predecessor (m).
    pub d_des: f64,
    pub env_d: Envelope,
    pub env_beta: Envelope,
    /// Optional saturation diagnostic; `None` disables it.
    pub saturation: Option<Saturation>,
    /// Optional soft guard: a normalized error within this distance of a
    /// boundary (or past it by at most this much) is pulled back inside and
    /// flagged instead of raising a breach. Off by default; meant only to
    /// absorb float-edge grazes, not to mask real faults.
    pub soft_guard: Option<f64>,
}

impl ControllerParams {
    pub fn new(k_d: f64, k_beta: f64, d_des: f64, env_d: Envelope, env_beta: Envelope) -> Self {
        Self {
            k_d,
            k_beta,
            d_des,
            env_d,
            env_beta,
            saturation: None,
            soft_guard: None,
        }
    }
}

/// Control law output plus per-call diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub control: ControlInput,
    /// Linear / angular output exceeded the configured saturation limit.
    pub saturated_v: bool,
    pub saturated_omega: bool,
    /// A normalized error was pulled back from the boundary by the soft
    /// guard.
    pub soft_guarded: bool,
}

/// Envelope breach attributed to a channel at a known time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlError {
    pub channel: Channel,
    pub t: f64,
    pub breach: EnvelopeBreach,
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} channel at t = {}: {}", self.channel, self.t, self.breach)
    }
}

/// Distance error `e_d = d - d_des`.
pub fn distance_error(m: Measurement, d_des: f64) -> f64 {
    m.d - d_des
}

/// Bearing error `e_beta = beta` (the target bearing is zero).
pub fn bearing_error(m: Measurement) -> f64 {
    m.beta
}

fn breach(channel: Channel, t: f64) -> impl FnOnce(EnvelopeBreach) -> ControlError {
    move |b| ControlError { channel, t, breach: b }
}

/// Linear velocity `v = k_d * eps_d(e_d / rho_d(t))`.
///
/// Zero exactly at zero error and sign-matching everywhere on the open
/// envelope; the gain multiplies last, so scaling `k_d` scales the output
/// exactly.
pub fn linear_velocity(e_d: f64, t: f64, p: &ControllerParams) -> Result<f64, ControlError> {
    let xi = envelope::normalize(e_d, p.env_d.rho(t));
    let eps = envelope::transform(xi, &p.env_d).map_err(breach(Channel::Distance, t))?;
    Ok(p.k_d * eps)
}

/// Angular velocity
/// `omega = k_beta * rho_beta(t)^-1 * r(xi_beta) * eps_beta(xi_beta)`.
pub fn angular_velocity(e_beta: f64, t: f64, p: &ControllerParams) -> Result<f64, ControlError> {
    let rho = p.env_beta.rho(t);
    let xi = envelope::normalize(e_beta, rho);
    let r = envelope::modulation(xi, &p.env_beta).map_err(breach(Channel::Bearing, t))?;
    let eps = envelope::transform(xi, &p.env_beta).map_err(breach(Channel::Bearing, t))?;
    Ok(p.k_beta * (r * eps / rho))
}

/// Pulls a grazing normalized error back inside the band. Only values
/// within `margin` of a boundary (on either side) are adjusted.
fn soft_guard_xi(xi: f64, env: &Envelope, margin: f64) -> Option<f64> {
    if xi >= env.m_upper && xi <= env.m_upper + margin {
        Some(env.m_upper - margin)
    } else if xi <= -env.m_lower && xi >= -env.m_lower - margin {
        Some(-env.m_lower + margin)
    } else {
        None
    }
}

/// Full per-tick control computation for one follower.
///
/// Depends on nothing but `(m, t, p)`; two calls with identical arguments
/// produce bitwise-identical outputs regardless of thread or ordering.
pub fn controller_step(m: Measurement, t: f64, p: &ControllerParams) -> Result<StepOutcome, ControlError> {
    let mut e_d = distance_error(m, p.d_des);
    let mut e_b = bearing_error(m);
    let mut soft_guarded = false;

    if let Some(margin) = p.soft_guard {
        let rho_d = p.env_d.rho(t);
        if let Some(xi) = soft_guard_xi(envelope::normalize(e_d, rho_d), &p.env_d, margin) {
            e_d = xi * rho_d;
            soft_guarded = true;
        }
        let rho_b = p.env_beta.rho(t);
        if let Some(xi) = soft_guard_xi(envelope::normalize(e_b, rho_b), &p.env_beta, margin) {
            e_b = xi * rho_b;
            soft_guarded = true;
        }
    }

    let mut v = linear_velocity(e_d, t, p)?;
    let mut omega = angular_velocity(e_b, t, p)?;

    let mut saturated_v = false;
    let mut saturated_omega = false;
    if let Some(sat) = p.saturation {
        saturated_v = v.abs() > sat.v_max;
        saturated_omega = omega.abs() > sat.omega_max;
        if sat.clamp {
            if saturated_v {
                v = v.clamp(-sat.v_max, sat.v_max);
            }
            if saturated_omega {
                omega = omega.clamp(-sat.omega_max, sat.omega_max);
            }
        }
    }

    Ok(StepOutcome {
        control: ControlInput::new(v, omega),
        saturated_v,
        saturated_omega,
        soft_guarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn deg(a: f64) -> f64 {
        a * PI / 180.0
    }

    fn reference_params() -> ControllerParams {
        ControllerParams::new(
            0.005,
            0.001,
            0.75,
            Envelope::new(0.7125, 1.25, 0.5, 0.0625).unwrap(),
            Envelope::new(deg(45.0), deg(45.0), 0.5, deg(1.15)).unwrap(),
        )
    }

    #[test]
    fn error_extraction() {
        let m = Measurement { d: 1.05, beta: 0.1 };
        assert_eq!(distance_error(m, 0.75), 0.30000000000000004);
        assert_relative_eq!(distance_error(m, 0.75), 0.3, max_relative = 1e-15);
        assert_eq!(distance_error(Measurement { d: 0.75, beta: 0.0 }, 0.75), 0.0);
        assert_eq!(bearing_error(m), 0.1);
    }

    #[test]
    fn linear_velocity_frozen_value() {
        let p = reference_params();
        assert_eq!(linear_velocity(0.0, 3.0, &p).unwrap(), 0.0);
        // 0.005 * ln((1 + 0.3/0.7125)/(1 - 0.3/1.25)) at t = 0
        assert_relative_eq!(
            linear_velocity(0.3, 0.0, &p).unwrap(),
            0.0031291736626982442,
            max_relative = 1e-13
        );
        assert!(linear_velocity(-0.3, 0.0, &p).unwrap() < 0.0);
    }

    #[test]
    fn angular_velocity_frozen_value() {
        let p = reference_params();
        assert_eq!(angular_velocity(0.0, 1.0, &p).unwrap(), 0.0);
        // xi = m_upper/2 with rho = 1: 0.001 * r * ln 3
        let e_b = p.env_beta.m_upper / 2.0;
        assert_relative_eq!(
            angular_velocity(e_b, 0.0, &p).unwrap(),
            0.0037301242940379715,
            max_relative = 1e-13
        );
        // sign matching across the admissible band
        for e in [-0.7, -0.2, 0.05, 0.6] {
            let w = angular_velocity(e, 0.0, &p).unwrap();
            assert_eq!(w > 0.0, e > 0.0);
            assert_eq!(w < 0.0, e < 0.0);
        }
    }

    #[test]
    fn controller_step_equilibrium_and_composition() {
        let p = reference_params();
        let eq = controller_step(Measurement { d: 0.75, beta: 0.0 }, 4.2, &p).unwrap();
        assert_eq!(eq.control, ControlInput::new(0.0, 0.0));

        let out = controller_step(Measurement { d: 1.05, beta: 0.0 }, 0.0, &p).unwrap();
        assert_relative_eq!(out.control.v, 0.0031291736626982442, max_relative = 1e-12);
        assert_eq!(out.control.omega, 0.0);
    }

    #[test]
    fn controller_step_is_deterministic() {
        let p = reference_params();
        let m = Measurement { d: 1.0, beta: 0.05 };
        let a = controller_step(m, 2.7, &p).unwrap();
        let b = controller_step(m, 2.7, &p).unwrap();
        assert_eq!(a.control.v.to_bits(), b.control.v.to_bits());
        assert_eq!(a.control.omega.to_bits(), b.control.omega.to_bits());
    }

    #[test]
    fn breach_is_attributed_to_channel_and_time() {
        let p = reference_params();
        // d at the connectivity limit: e_d = 1.25 = m_upper exactly.
        let err = controller_step(Measurement { d: 2.0, beta: 0.0 }, 0.0, &p).unwrap_err();
        assert_eq!(err.channel, Channel::Distance);
        assert_eq!(err.t, 0.0);
        assert_eq!(err.breach.xi, 1.25);

        let err = controller_step(Measurement { d: 0.75, beta: deg(45.0) }, 0.0, &p).unwrap_err();
        assert_eq!(err.channel, Channel::Bearing);
    }

    #[test]
    fn gain_scaling_is_exact() {
        let p = reference_params();
        let mut p2 = p.clone();
        p2.k_d *= 2.0;
        p2.k_beta *= 2.0;
        let m = Measurement { d: 1.13, beta: -0.31 };
        let a = controller_step(m, 1.9, &p).unwrap().control;
        let b = controller_step(m, 1.9, &p2).unwrap().control;
        assert_eq!((2.0 * a.v).to_bits(), b.v.to_bits());
        assert_eq!((2.0 * a.omega).to_bits(), b.omega.to_bits());
    }

    #[test]
    fn saturation_flags_without_clamping() {
        let mut p = reference_params();
        p.saturation = Some(Saturation {
            v_max: 1e-3,
            omega_max: 1e-3,
            clamp: false,
        });
        let out = controller_step(Measurement { d: 1.05, beta: 0.0 }, 0.0, &p).unwrap();
        assert!(out.saturated_v);
        assert!(!out.saturated_omega);
        assert!(out.control.v.abs() > 1e-3, "must not clamp by default");

        p.saturation = Some(Saturation {
            v_max: 1e-3,
            omega_max: 1e-3,
            clamp: true,
        });
        let out = controller_step(Measurement { d: 1.05, beta: 0.0 }, 0.0, &p).unwrap();
        assert_eq!(out.control.v, 1e-3);
    }

    #[test]
    fn soft_guard_downgrades_boundary_grazes() {
        let mut p = reference_params();
        // Exactly on the upper distance boundary at t = 0.
        let graze = Measurement { d: 2.0, beta: 0.0 };
        assert!(controller_step(graze, 0.0, &p).is_err());

        p.soft_guard = Some(1e-9);
        let out = controller_step(graze, 0.0, &p).unwrap();
        assert!(out.soft_guarded);
        assert!(out.control.v.is_finite());

        // Far outside stays a hard breach even with the guard on.
        let err = controller_step(Measurement { d: 2.4, beta: 0.0 }, 0.0, &p);
        assert!(err.is_err());
    }
}
