//! Unit-tagged scalar parsing for configuration files.
//!
//! Every dimensioned value is written as `"<number> <unit>"` — `"0.75 m"`,
//! `"45 deg"`, `"0.001 s"`, `"0.3 m/s"`, `"0.2 rad/s"`. Unit-less numbers
//! are rejected for dimensioned fields so a bare `45` can never be
//! mistaken for degrees or radians. Angles are converted to radians;
//! everything else is SI already.

use std::f64::consts::PI;

/// Physical dimension a configuration field expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Angle,
    LinearVelocity,
    AngularVelocity,
}

impl Dimension {
    pub fn expected_units(&self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Angle => "deg | rad",
            Dimension::LinearVelocity => "m/s",
            Dimension::AngularVelocity => "rad/s | deg/s",
        }
    }
}

/// Parses `"<number> <unit>"` into an SI/radian value.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let trimmed = text.trim();
    let mut parts = trimmed.split_whitespace();
    let (num, unit) = match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(u), None) => (n, u),
        _ => {
            return Err(format!(
                "expected \"<number> <unit>\" with unit in {{{}}}, got \"{trimmed}\"",
                dim.expected_units()
            ))
        }
    };
    let value: f64 = num
        .parse()
        .map_err(|_| format!("\"{num}\" is not a number"))?;
    if !value.is_finite() {
        return Err(format!("\"{num}\" is not finite"));
    }
    let scale = match (dim, unit) {
        (Dimension::Length, "m") => 1.0,
        (Dimension::Time, "s") => 1.0,
        (Dimension::Angle, "rad") => 1.0,
        (Dimension::Angle, "deg") => PI / 180.0,
        (Dimension::LinearVelocity, "m/s") => 1.0,
        (Dimension::AngularVelocity, "rad/s") => 1.0,
        (Dimension::AngularVelocity, "deg/s") => PI / 180.0,
        _ => {
            return Err(format!(
                "unit \"{unit}\" invalid here; expected one of {{{}}}",
                dim.expected_units()
            ))
        }
    };
    Ok(value * scale)
}

/// Formats a value back into canonical `"<number> <unit>"` form (radians
/// and SI units; shortest round-trip float formatting).
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    let unit = match dim {
        Dimension::Length => "m",
        Dimension::Time => "s",
        Dimension::Angle => "rad",
        Dimension::LinearVelocity => "m/s",
        Dimension::AngularVelocity => "rad/s",
    };
    format!("{value} {unit}")
}
