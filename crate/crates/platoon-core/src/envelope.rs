//! Prescribed-performance machinery: shrinking performance envelopes, error
//! normalization, the logarithmic error transformation, and its modulation
//! gain.
//!
//! An error channel with asymmetric bounds `(m_lower, m_upper)` and
//! performance function `rho(t)` is considered healthy while
//! `-m_lower * rho(t) < e(t) < m_upper * rho(t)` (strictly). The
//! transformation `eps = ln((1 + xi/m_lower) / (1 - xi/m_upper))` of the
//! normalized error `xi = e / rho(t)` maps that open band onto the whole
//! real line and diverges at the boundary, which is what lets a bounded
//! control gain enforce an arbitrarily tight envelope.
//!
//! Boundary contact is reported as [`EnvelopeBreach`] rather than clamped:
//! with exact arithmetic the closed loop never touches the boundary, so a
//! breach always indicates a configuration or step-size fault worth
//! surfacing. An optional soft guard (see the controller) can downgrade
//! float-edge grazes.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Constraints;

/// Performance envelope of one error channel.
///
/// `rho(t) = (1 - rho_inf/max(m_lower, m_upper)) * exp(-decay * t)
///          + rho_inf/max(m_lower, m_upper)`
///
/// so that `rho(0) = 1` and the admissible band `(-m_lower * rho(t),
/// m_upper * rho(t))` shrinks monotonically to `(-m_lower, m_upper)`
/// scaled by `rho_inf / max(m_lower, m_upper)`. `rho_inf` is kept in raw
/// error units (m or rad) and divided by `max(m_lower, m_upper)` here, so
/// steady-state accuracy targets are direct configuration values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// Lower bound magnitude `m_lower > 0` (error units).
    pub m_lower: f64,
    /// Upper bound magnitude `m_upper > 0` (error units).
    pub m_upper: f64,
    /// Exponential decay rate of the envelope (1/s), > 0.
    pub decay: f64,
    /// Steady-state envelope half-width in raw error units;
    /// `0 < rho_inf < max(m_lower, m_upper)`.
    pub rho_inf: f64,
}

impl Envelope {
    pub fn new(m_lower: f64, m_upper: f64, decay: f64, rho_inf: f64) -> Result<Self, EnvelopeError> {
        let env = Self {
            m_lower,
            m_upper,
            decay,
            rho_inf,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        let ok = self.m_lower > 0.0
            && self.m_upper > 0.0
            && self.decay > 0.0
            && self.rho_inf > 0.0
            && self.rho_inf < self.m_lower.max(self.m_upper)
            && self.m_lower.is_finite()
            && self.m_upper.is_finite()
            && self.decay.is_finite();
        if ok {
            Ok(())
        } else {
            Err(EnvelopeError::InvalidParameters)
        }
    }

    /// Asymptotic value of the performance function,
    /// `rho_inf / max(m_lower, m_upper)`.
    pub fn rho_floor(&self) -> f64 {
        self.rho_inf / self.m_lower.max(self.m_upper)
    }

    /// Performance function value at `t >= 0`; strictly decreasing from
    /// `rho(0) = 1` toward [`Envelope::rho_floor`].
    pub fn rho(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "performance function evaluated at negative time");
        let floor = self.rho_floor();
        (1.0 - floor) * libm::exp(-self.decay * t) + floor
    }

    /// Time derivative of the performance function; always <= 0.
    pub fn rho_dot(&self, t: f64) -> f64 {
        -self.decay * (1.0 - self.rho_floor()) * libm::exp(-self.decay * t)
    }

    /// Displayed envelope band at time `t`: `(-m_lower * rho(t),
    /// m_upper * rho(t))`.
    pub fn band(&self, t: f64) -> (f64, f64) {
        let r = self.rho(t);
        (-self.m_lower * r, self.m_upper * r)
    }

    /// Strict envelope membership of a raw error at time `t`.
    ///
    /// Evaluated through the normalized error so that it agrees exactly,
    /// comparison for comparison, with the domain check of [`transform`]:
    /// `check(e, t)` is true iff `transform(normalize(e, rho(t)))` is
    /// defined.
    pub fn check(&self, e: f64, t: f64) -> bool {
        let xi = normalize(e, self.rho(t));
        -self.m_lower < xi && xi < self.m_upper
    }
}

/// Envelope bounds derived from the constraint set for one desired
/// distance: the distance channel gets `(d_des - d_col, d_con - d_des)`
/// and the bearing channel the symmetric pair `(beta_con, beta_con)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedBounds {
    pub m_lower_d: f64,
    pub m_upper_d: f64,
    pub m_beta: f64,
}

/// Derives envelope bounds from the constraints; requires
/// `d_col < d_des < d_con` so that both distance bounds are positive.
pub fn derive_bounds(d_des: f64, c: &Constraints) -> Result<DerivedBounds, EnvelopeError> {
    if !(c.d_col < d_des && d_des < c.d_con) {
        return Err(EnvelopeError::DesiredDistanceOutOfRange {
            d_des,
            d_col: c.d_col,
            d_con: c.d_con,
        });
    }
    Ok(DerivedBounds {
        m_lower_d: d_des - c.d_col,
        m_upper_d: c.d_con - d_des,
        m_beta: c.beta_con,
    })
}

/// Normalized error `xi = e / rho_t`. `rho_t` must be positive; values of
/// `xi` outside the open band are not an error here — boundary policing
/// happens in [`transform`].
pub fn normalize(e: f64, rho_t: f64) -> f64 {
    debug_assert!(rho_t > 0.0, "normalization by a non-positive rho");
    e / rho_t
}

/// Normalized error at or outside its envelope boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBreach {
    pub xi: f64,
    pub m_lower: f64,
    pub m_upper: f64,
}

impl fmt::Display for EnvelopeBreach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "normalized error {} outside open envelope ({}, {})",
            self.xi, -self.m_lower, self.m_upper
        )
    }
}

fn check_xi(xi: f64, env: &Envelope) -> Result<(), EnvelopeBreach> {
    if -env.m_lower < xi && xi < env.m_upper {
        Ok(())
    } else {
        Err(EnvelopeBreach {
            xi,
            m_lower: env.m_lower,
            m_upper: env.m_upper,
        })
    }
}

/// Logarithmic error transformation
/// `eps = ln((1 + xi/m_lower) / (1 - xi/m_upper))`.
///
/// Strictly increasing on the open band, zero at zero, and divergent at
/// the boundary.
pub fn transform(xi: f64, env: &Envelope) -> Result<f64, EnvelopeBreach> {
    check_xi(xi, env)?;
    // log1p keeps full relative accuracy for small xi; algebraically this
    // is ln((1 + xi/m_lower) / (1 - xi/m_upper)).
    Ok(libm::log1p(xi / env.m_lower) - libm::log1p(-xi / env.m_upper))
}

/// Modulation gain `r(xi) = (1/m_lower + 1/m_upper) /
/// ((1 + xi/m_lower)(1 - xi/m_upper))`, the derivative of [`transform`]
/// with respect to `xi`. Positive on the open band with minimum
/// `1/m_lower + 1/m_upper`.
pub fn modulation(xi: f64, env: &Envelope) -> Result<f64, EnvelopeBreach> {
    check_xi(xi, env)?;
    Ok((1.0 / env.m_lower + 1.0 / env.m_upper)
        / ((1.0 + xi / env.m_lower) * (1.0 - xi / env.m_upper)))
}

/// Inverse of [`transform`]: `xi = (e^eps - 1) / (e^eps/m_upper + 1/m_lower)`.
///
/// Used by the verification suite to confirm the transformation is a
/// bijection from the open band onto the real line.
pub fn inverse_transform(eps: f64, env: &Envelope) -> f64 {
    // expm1 keeps relative accuracy for small eps.
    libm::expm1(eps) / (libm::exp(eps) / env.m_upper + 1.0 / env.m_lower)
}

/// Which error channel of a follower a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Distance,
    Bearing,
}

impl Channel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::Distance => "distance",
            Channel::Bearing => "bearing",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One initial-feasibility violation, attributed to a vehicle and channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialViolation {
    /// Follower index, 1-based (vehicle 1 follows the leader).
    pub vehicle: usize,
    pub channel: Channel,
    /// Offending initial error value.
    pub value: f64,
    /// Open band the value must lie in at t = 0.
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Display for InitialViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vehicle {} {} error {} outside open initial band ({}, {})",
            self.vehicle, self.channel, self.value, self.lower, self.upper
        )
    }
}

/// Initial errors of one follower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialErrors {
    pub e_d: f64,
    pub e_beta: f64,
}

/// Checks every follower's initial errors strictly inside its envelopes at
/// `t = 0` (where `rho = 1`, so this is exactly the initial-feasibility
/// requirement restated through the derived bounds). Returns every
/// violation, not just the first.
pub fn validate_initial(
    errors: &[InitialErrors],
    envelopes: &[(Envelope, Envelope)],
) -> Result<(), Vec<InitialViolation>> {
    debug_assert_eq!(errors.len(), envelopes.len());
    let mut violations = Vec::new();
    for (idx, (err, (env_d, env_b))) in errors.iter().zip(envelopes.iter()).enumerate() {
        let vehicle = idx + 1;
        if !env_d.check(err.e_d, 0.0) {
            violations.push(InitialViolation {
                vehicle,
                channel: Channel::Distance,
                value: err.e_d,
                lower: -env_d.m_lower,
                upper: env_d.m_upper,
            });
        }
        if !env_b.check(err.e_beta, 0.0) {
            violations.push(InitialViolation {
                vehicle,
                channel: Channel::Bearing,
                value: err.e_beta,
                lower: -env_b.m_lower,
                upper: env_b.m_upper,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeError {
    InvalidParameters,
    DesiredDistanceOutOfRange { d_des: f64, d_col: f64, d_con: f64 },
}

impl fmt::Display for EnvelopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeError::InvalidParameters => f.write_str(
                "envelope requires m_lower, m_upper, decay > 0 and 0 < rho_inf < max(m_lower, m_upper)",
            ),
            EnvelopeError::DesiredDistanceOutOfRange { d_des, d_col, d_con } => write!(
                f,
                "desired distance {d_des} must lie strictly inside ({d_col}, {d_con})"
            ),
        }
    }
}
