//! Relative geometry between successive vehicles, camera field-of-view
//! visibility, and collision/connectivity classification.
//!
//! The bearing convention is `beta = wrap(line-of-sight angle - follower
//! heading)`: positive when the predecessor sits to the follower's left.
//! The sign is pinned by the finite-difference audit in the simulator, which
//! checks the measured derivatives of `(d, beta)` against the analytic error
//! dynamics along integrated trajectories.

use core::f64::consts::PI;
use core::fmt;

use crate::kinematics::{wrap_angle, Pose};

/// Camera-derived distance and bearing to the preceding vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Center-to-center distance (m); strictly positive.
    pub d: f64,
    /// Bearing to the predecessor relative to the follower heading (rad),
    /// wrapped to `(-pi, pi]`.
    pub beta: f64,
}

/// Detection envelope of the onboard camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    /// Maximum detection distance (m).
    pub range: f64,
    /// Full angle of view (rad); the half-angle bounds the usable bearing.
    pub aov: f64,
}

impl CameraModel {
    /// Validates `range > 0` and `0 < aov < pi`.
    pub fn new(range: f64, aov: f64) -> Result<Self, GeometryError> {
        let cam = Self { range, aov };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !self.range.is_finite() || self.range <= 0.0 {
            return Err(GeometryError::InvalidCamera);
        }
        if !(self.aov > 0.0 && self.aov < PI) {
            return Err(GeometryError::InvalidCamera);
        }
        Ok(())
    }

    /// Half angle of view, the largest usable |bearing|.
    pub fn half_aov(&self) -> f64 {
        0.5 * self.aov
    }
}

/// Collision and connectivity limits on the relative geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    /// Collision distance (m): `d` must stay strictly above this.
    pub d_col: f64,
    /// Connectivity distance (m): `d` must stay strictly below this.
    pub d_con: f64,
    /// Connectivity bearing (rad): `|beta|` must stay strictly below this.
    pub beta_con: f64,
}

impl Constraints {
    /// Validates `0 < d_col < d_con` and `0 < beta_con < pi/2`.
    pub fn new(d_col: f64, d_con: f64, beta_con: f64) -> Result<Self, GeometryError> {
        let c = Self {
            d_col,
            d_con,
            beta_con,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.d_col > 0.0 && self.d_col < self.d_con) || !self.d_con.is_finite() {
            return Err(GeometryError::InvalidConstraints);
        }
        if !(self.beta_con > 0.0 && self.beta_con < PI / 2.0) {
            return Err(GeometryError::InvalidConstraints);
        }
        Ok(())
    }
}

/// Camera visibility of the predecessor's marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Visible,
    OutOfRange,
    OutOfFov,
}

/// Classification of a measurement against the collision/connectivity
/// constraints. The feasible region is open; boundary contact is a
/// violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintStatus {
    Ok,
    Collision,
    ConnectivityBreak,
}

impl ConstraintStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintStatus::Ok => "ok",
            ConstraintStatus::Collision => "collision",
            ConstraintStatus::ConnectivityBreak => "connectivity_break",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(ConstraintStatus::Ok),
            "collision" => Some(ConstraintStatus::Collision),
            "connectivity_break" => Some(ConstraintStatus::ConnectivityBreak),
            _ => None,
        }
    }
}

impl fmt::Display for ConstraintStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    /// Follower and predecessor positions coincide; distance and bearing
    /// are undefined.
    CoincidentPositions,
    InvalidCamera,
    InvalidConstraints,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::CoincidentPositions => {
                f.write_str("coincident vehicle positions: relative geometry undefined")
            }
            GeometryError::InvalidCamera => {
                f.write_str("camera model requires range > 0 and 0 < aov < pi")
            }
            GeometryError::InvalidConstraints => {
                f.write_str("constraints require 0 < d_col < d_con and 0 < beta_con < pi/2")
            }
        }
    }
}

/// Distance and bearing from `follower` to `predecessor`.
pub fn relative_measurement(follower: Pose, predecessor: Pose) -> Result<Measurement, GeometryError> {
    let dx = predecessor.x - follower.x;
    let dy = predecessor.y - follower.y;
    let d = libm::hypot(dx, dy);
    if d == 0.0 {
        return Err(GeometryError::CoincidentPositions);
    }
    let beta = wrap_angle(libm::atan2(dy, dx) - follower.phi);
    Ok(Measurement { d, beta })
}

/// Relative heading `gamma = wrap(phi_follower - phi_predecessor)`.
pub fn relative_heading(follower: Pose, predecessor: Pose) -> f64 {
    wrap_angle(follower.phi - predecessor.phi)
}

/// Whether the predecessor's marker is inside the camera's detection
/// envelope. Both limits are inclusive; out-of-range wins when both fail.
pub fn camera_visibility(m: Measurement, cam: CameraModel) -> Visibility {
    if m.d > cam.range {
        Visibility::OutOfRange
    } else if m.beta.abs() > cam.half_aov() {
        Visibility::OutOfFov
    } else {
        Visibility::Visible
    }
}

/// Classifies a measurement against the open constraint region
/// `d_col < d < d_con`, `|beta| < beta_con`. Collision takes precedence.
pub fn constraint_status(m: Measurement, c: Constraints) -> ConstraintStatus {
    if m.d <= c.d_col {
        ConstraintStatus::Collision
    } else if m.d >= c.d_con || m.beta.abs() >= c.beta_con {
        ConstraintStatus::ConnectivityBreak
    } else {
        ConstraintStatus::Ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn deg(a: f64) -> f64 {
        a * PI / 180.0
    }

    #[test]
    fn measurement_on_axis() {
        let m = relative_measurement(Pose::new(0.0, 0.0, 0.0), Pose::new(1.0, 0.0, 0.7)).unwrap();
        assert_eq!(m.d, 1.0);
        assert_eq!(m.beta, 0.0);
    }

    #[test]
    fn measurement_diagonal() {
        let m = relative_measurement(Pose::new(0.0, 0.0, 0.0), Pose::new(1.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(m.d, core::f64::consts::SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(m.beta, PI / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn measurement_heading_aligned_with_los() {
        let m = relative_measurement(Pose::new(0.0, 0.0, PI / 2.0), Pose::new(0.0, 2.0, 0.0)).unwrap();
        assert_eq!(m.d, 2.0);
        assert_eq!(m.beta, 0.0);
    }

    #[test]
    fn measurement_rejects_coincident_positions() {
        let e = relative_measurement(Pose::new(1.0, 2.0, 0.0), Pose::new(1.0, 2.0, 0.5));
        assert_eq!(e, Err(GeometryError::CoincidentPositions));
    }

    #[test]
    fn relative_heading_cases() {
        assert_eq!(
            relative_heading(Pose::new(0.0, 0.0, 0.4), Pose::new(0.0, 0.0, 0.4)),
            0.0
        );
        assert_relative_eq!(
            relative_heading(Pose::new(0.0, 0.0, PI / 2.0), Pose::new(0.0, 0.0, 0.0)),
            PI / 2.0
        );
        // wrap(-6) = 2*pi - 6
        assert_relative_eq!(
            relative_heading(Pose::new(0.0, 0.0, -3.0), Pose::new(0.0, 0.0, 3.0)),
            0.28318530717958623,
            max_relative = 1e-14
        );
    }

    #[test]
    fn visibility_classification() {
        let cam = CameraModel::new(2.0, deg(90.0)).unwrap();
        let m = |d, beta| Measurement { d, beta };
        assert_eq!(camera_visibility(m(1.0, 0.0), cam), Visibility::Visible);
        assert_eq!(camera_visibility(m(2.5, 0.0), cam), Visibility::OutOfRange);
        // 50 deg > half aov of 45 deg
        assert_eq!(
            camera_visibility(m(1.0, deg(50.0)), cam),
            Visibility::OutOfFov
        );
        // out-of-range wins when both fail
        assert_eq!(
            camera_visibility(m(3.0, deg(80.0)), cam),
            Visibility::OutOfRange
        );
        // boundary is inclusive for visibility
        assert_eq!(camera_visibility(m(2.0, deg(45.0)), cam), Visibility::Visible);
    }

    #[test]
    fn constraint_classification_is_strict() {
        let c = Constraints::new(0.0375, 2.0, deg(45.0)).unwrap();
        let m = |d, beta| Measurement { d, beta };
        assert_eq!(constraint_status(m(0.75, 0.0), c), ConstraintStatus::Ok);
        // boundaries violate the open region
        assert_eq!(
            constraint_status(m(0.0375, 0.0), c),
            ConstraintStatus::Collision
        );
        assert_eq!(
            constraint_status(m(1.0, deg(45.0)), c),
            ConstraintStatus::ConnectivityBreak
        );
        assert_eq!(
            constraint_status(m(2.0, 0.0), c),
            ConstraintStatus::ConnectivityBreak
        );
        // collision precedence over a simultaneous bearing break
        assert_eq!(
            constraint_status(m(0.01, deg(60.0)), c),
            ConstraintStatus::Collision
        );
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(CameraModel::new(0.0, 1.0).is_err());
        assert!(CameraModel::new(2.0, PI).is_err());
        assert!(Constraints::new(0.5, 0.4, 0.3).is_err());
        assert!(Constraints::new(0.1, 2.0, PI / 2.0).is_err());
    }

    #[test]
    fn status_string_round_trip() {
        for s in [
            ConstraintStatus::Ok,
            ConstraintStatus::Collision,
            ConstraintStatus::ConnectivityBreak,
        ] {
            assert_eq!(ConstraintStatus::parse(s.as_str()), Some(s));
        }
        assert_eq!(ConstraintStatus::parse("bogus"), None);
    }
}
