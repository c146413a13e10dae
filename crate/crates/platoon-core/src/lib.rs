//! Deterministic simulation and control core for 2-D unicycle platoons under
//! a decentralized prescribed-performance following law.
//!
//! Each follower measures only the distance and bearing to the vehicle
//! directly ahead of it and maps that measurement, through a shrinking
//! performance envelope and a logarithmic error transformation, to its own
//! linear and angular velocity. The library provides:
//!
//! - [`kinematics`]: unicycle models, leader velocity profiles, and
//!   fixed-step integration (Euler / RK4);
//! - [`geometry`]: relative distance/bearing sensing, camera field-of-view
//!   visibility, and collision/connectivity classification;
//! - [`envelope`]: performance functions, error normalization, the
//!   logarithmic transformation and its modulation gain, plus the initial
//!   feasibility gate;
//! - [`controller`]: the per-vehicle control law;
//! - [`simulator`]: scenario assembly and validation, the closed-loop
//!   stepping engine with envelope/constraint monitors, and independent
//!   verification of the analytic error dynamics (scalar and stacked
//!   matrix forms, finite-difference audit).
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through [`libm`], so results are bit-reproducible across hosts with
//! IEEE-754 doubles. IO, configuration, and file formats live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod controller;
pub mod envelope;
pub mod geometry;
pub mod kinematics;
pub mod simulator;

pub use controller::{ControlError, ControllerParams};
pub use envelope::{Channel, Envelope, EnvelopeBreach};
pub use geometry::{CameraModel, ConstraintStatus, Constraints, Measurement};
pub use kinematics::{ControlInput, Integrator, LeaderTrajectory, Pose};
pub use simulator::{BreachPolicy, RunReport, Scenario, SimResult, Trace};
