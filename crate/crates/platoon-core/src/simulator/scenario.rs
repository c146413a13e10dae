//! Scenario description and up-front validation.
//!
//! Everything that can be rejected before stepping is rejected here, with
//! one issue per problem rather than fail-fast: initial feasibility per
//! vehicle and channel, sensor/constraint compatibility, envelope-bound
//! consistency, and basic structure.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::controller::ControllerParams;
use crate::envelope::{self, InitialErrors, InitialViolation};
use crate::geometry::{
    relative_measurement, CameraModel, Constraints, GeometryError,
};
use crate::kinematics::{wrap_angle, Integrator, LeaderTrajectory, Pose};

/// What the engine does when a follower's error reaches its envelope
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreachPolicy {
    /// Stop immediately, returning the partial trace plus a diagnostic.
    /// A breach signals a configuration or step-size fault, so this is the
    /// default.
    Halt,
    /// Freeze the offending controller at its last valid output, log the
    /// violation, and keep stepping.
    RecordAndContinue,
}

/// Initial relative placement of one follower behind its predecessor:
/// distance, bearing, and relative heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialTriple {
    pub d: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Constructs absolute follower poses front-to-back from relative triples,
/// starting at the leader. Each follower is placed at distance `d` along
/// the back-bearing implied by `beta`, with heading offset `gamma` from its
/// predecessor; re-measuring the constructed poses reproduces the triples
/// exactly.
pub fn poses_from_triples(leader: Pose, triples: &[InitialTriple]) -> Vec<Pose> {
    let mut poses = Vec::with_capacity(triples.len());
    let mut pred = leader;
    for t in triples {
        let phi = wrap_angle(pred.phi + t.gamma);
        let los = phi + t.beta;
        let pose = Pose {
            x: pred.x - t.d * libm::cos(los),
            y: pred.y - t.d * libm::sin(los),
            phi,
        };
        poses.push(pose);
        pred = pose;
    }
    poses
}

/// A fully specified closed-loop run: leader, followers, constraints,
/// sensor model, per-vehicle controllers, and stepping parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub trajectory: LeaderTrajectory,
    pub leader_pose: Pose,
    /// Absolute initial poses of the followers, front (vehicle 1) to back.
    pub follower_poses: Vec<Pose>,
    /// One controller per follower, same order.
    pub controllers: Vec<ControllerParams>,
    pub constraints: Constraints,
    pub camera: CameraModel,
    /// Fixed integration step (s).
    pub dt: f64,
    /// Run length (s). Anything shorter than `dt` yields a single-row
    /// trace of the initial condition.
    pub duration: f64,
    pub integrator: Integrator,
    pub breach_policy: BreachPolicy,
    /// Fraction of the run, measured from the end, used for steady-state
    /// report metrics.
    pub tail_fraction: f64,
}

impl Scenario {
    pub fn n_followers(&self) -> usize {
        self.controllers.len()
    }

    /// Number of integration steps; the trace has `steps() + 1` rows.
    pub fn steps(&self) -> usize {
        if self.duration <= 0.0 {
            return 0;
        }
        let ratio = self.duration / self.dt;
        let nearest = libm::round(ratio);
        let n = if (ratio - nearest).abs() < 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            libm::ceil(ratio)
        };
        n as usize
    }

    /// Validates the whole configuration, returning every issue found.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut issues = Vec::new();

        if self.controllers.is_empty() {
            issues.push(ScenarioIssue::Structure(String::from(
                "at least one follower is required",
            )));
        }
        if self.follower_poses.len() != self.controllers.len() {
            issues.push(ScenarioIssue::Structure(format!(
                "{} initial poses for {} controllers",
                self.follower_poses.len(),
                self.controllers.len()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            issues.push(ScenarioIssue::Structure(format!(
                "integration step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            issues.push(ScenarioIssue::Structure(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            issues.push(ScenarioIssue::Structure(format!(
                "tail fraction must be in (0, 1], got {}",
                self.tail_fraction
            )));
        }

        if let Err(e) = self.camera.validate() {
            issues.push(ScenarioIssue::Camera(e));
        }
        if let Err(e) = self.constraints.validate() {
            issues.push(ScenarioIssue::Constraints(e));
        }

        // The constraint region must sit inside the sensor envelope, or the
        // connectivity guarantee would not keep the marker detectable.
        if self.camera.validate().is_ok() && self.constraints.validate().is_ok() {
            if self.constraints.d_con > self.camera.range {
                issues.push(ScenarioIssue::SensorCompatibility(format!(
                    "d_con = {} exceeds camera range {}",
                    self.constraints.d_con, self.camera.range
                )));
            }
            if self.constraints.beta_con > self.camera.half_aov() {
                issues.push(ScenarioIssue::SensorCompatibility(format!(
                    "beta_con = {} exceeds half angle of view {}",
                    self.constraints.beta_con,
                    self.camera.half_aov()
                )));
            }
        }

        self.validate_leader(&mut issues);
        self.validate_controllers(&mut issues);
        self.validate_initial_state(&mut issues);

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError { issues })
        }
    }

    fn validate_leader(&self, issues: &mut Vec<ScenarioIssue>) {
        let finite = |v: f64| v.is_finite();
        match &self.trajectory {
            LeaderTrajectory::Constant { v, omega } => {
                if !finite(*v) || !finite(*omega) {
                    issues.push(ScenarioIssue::Structure(String::from(
                        "leader velocities must be finite",
                    )));
                }
            }
            LeaderTrajectory::Schedule { segments } => {
                if segments.is_empty() {
                    issues.push(ScenarioIssue::Structure(String::from(
                        "leader schedule must have at least one segment",
                    )));
                } else {
                    if segments[0].t_start != 0.0 {
                        issues.push(ScenarioIssue::Structure(format!(
                            "leader schedule must start at t = 0, got {}",
                            segments[0].t_start
                        )));
                    }
                    for w in segments.windows(2) {
                        if w[1].t_start <= w[0].t_start {
                            issues.push(ScenarioIssue::Structure(format!(
                                "leader schedule times must strictly increase ({} then {})",
                                w[0].t_start, w[1].t_start
                            )));
                        }
                    }
                    if segments
                        .iter()
                        .any(|s| !finite(s.v) || !finite(s.omega) || !finite(s.t_start))
                    {
                        issues.push(ScenarioIssue::Structure(String::from(
                            "leader schedule entries must be finite",
                        )));
                    }
                }
            }
            LeaderTrajectory::SinusoidalOmega {
                v,
                amplitude,
                frequency,
            } => {
                if !finite(*v) || !finite(*amplitude) || !finite(*frequency) {
                    issues.push(ScenarioIssue::Structure(String::from(
                        "leader velocities must be finite",
                    )));
                }
            }
        }
    }

    fn validate_controllers(&self, issues: &mut Vec<ScenarioIssue>) {
        for (idx, p) in self.controllers.iter().enumerate() {
            let vehicle = idx + 1;
            let mut push = |detail: String| {
                issues.push(ScenarioIssue::Controller { vehicle, detail });
            };
            if !(p.k_d > 0.0 && p.k_d.is_finite()) {
                push(format!("k_d must be positive, got {}", p.k_d));
            }
            if !(p.k_beta > 0.0 && p.k_beta.is_finite()) {
                push(format!("k_beta must be positive, got {}", p.k_beta));
            }
            if p.env_d.validate().is_err() || p.env_beta.validate().is_err() {
                push(String::from("envelope parameters are invalid"));
                continue;
            }
            // Envelope bounds must be the ones derived from (d_des,
            // constraints), or the envelope guarantee no longer implies the
            // collision/connectivity constraints.
            match envelope::derive_bounds(p.d_des, &self.constraints) {
                Err(e) => push(format!("{e}")),
                Ok(b) => {
                    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
                    if !close(p.env_d.m_lower, b.m_lower_d) || !close(p.env_d.m_upper, b.m_upper_d)
                    {
                        push(format!(
                            "distance envelope bounds ({}, {}) inconsistent with derived ({}, {})",
                            p.env_d.m_lower, p.env_d.m_upper, b.m_lower_d, b.m_upper_d
                        ));
                    }
                    if !close(p.env_beta.m_lower, b.m_beta) || !close(p.env_beta.m_upper, b.m_beta)
                    {
                        push(format!(
                            "bearing envelope bounds ({}, {}) must both equal beta_con = {}",
                            p.env_beta.m_lower, p.env_beta.m_upper, b.m_beta
                        ));
                    }
                }
            }
            if let Some(g) = p.soft_guard {
                if !(g > 0.0 && g.is_finite()) {
                    push(format!("soft guard margin must be positive, got {g}"));
                }
            }
        }
    }

    fn validate_initial_state(&self, issues: &mut Vec<ScenarioIssue>) {
        if self.follower_poses.len() != self.controllers.len() {
            return;
        }
        let mut errors = Vec::with_capacity(self.controllers.len());
        let mut envelopes = Vec::with_capacity(self.controllers.len());
        let mut pred = self.leader_pose;
        for (idx, (pose, params)) in self
            .follower_poses
            .iter()
            .zip(self.controllers.iter())
            .enumerate()
        {
            match relative_measurement(*pose, pred) {
                Err(e) => {
                    issues.push(ScenarioIssue::InitialGeometry {
                        vehicle: idx + 1,
                        error: e,
                    });
                    return;
                }
                Ok(m) => {
                    errors.push(InitialErrors {
                        e_d: m.d - params.d_des,
                        e_beta: m.beta,
                    });
                    envelopes.push((params.env_d, params.env_beta));
                }
            }
            pred = *pose;
        }
        if let Err(violations) = envelope::validate_initial(&errors, &envelopes) {
            issues.extend(violations.into_iter().map(ScenarioIssue::InitialFeasibility));
        }
    }
}

/// One validation problem; a scenario rejection lists all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioIssue {
    Structure(String),
    Camera(GeometryError),
    Constraints(GeometryError),
    SensorCompatibility(String),
    Controller { vehicle: usize, detail: String },
    InitialGeometry { vehicle: usize, error: GeometryError },
    InitialFeasibility(InitialViolation),
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioIssue::Structure(s) => write!(f, "{s}"),
            ScenarioIssue::Camera(e) => write!(f, "{e}"),
            ScenarioIssue::Constraints(e) => write!(f, "{e}"),
            ScenarioIssue::SensorCompatibility(s) => write!(f, "{s}"),
            ScenarioIssue::Controller { vehicle, detail } => {
                write!(f, "vehicle {vehicle}: {detail}")
            }
            ScenarioIssue::InitialGeometry { vehicle, error } => {
                write!(f, "vehicle {vehicle}: {error}")
            }
            ScenarioIssue::InitialFeasibility(v) => write!(f, "{v}"),
        }
    }
}

/// Scenario rejection carrying every issue found.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub issues: Vec<ScenarioIssue>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario rejected ({} issues):", self.issues.len())?;
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}
