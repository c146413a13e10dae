//! Run report JSON with stable key names.
//!
//! The statistics are exactly the engine's [`RunReport`]; `wall_clock_seconds`
//! and `seed` are provenance stamps supplied by the command layer. Reports
//! are recomputable: rebuilding from the written trace (plus the halt
//! diagnostic carried in the report) reproduces every statistic.

use std::fs;
use std::io;
use std::path::Path;

use platoon_core::envelope::Channel;
use platoon_core::simulator::{
    ChannelCounter, HaltDiagnostic, HaltReason, PairRange, RunReport,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterJson {
    pub count: usize,
    pub first_time: Option<f64>,
}

impl From<ChannelCounter> for CounterJson {
    fn from(c: ChannelCounter) -> Self {
        Self {
            count: c.count,
            first_time: c.first_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRangeJson {
    pub vehicle: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaltJson {
    pub t: f64,
    pub step: usize,
    pub vehicle: usize,
    /// One of `envelope_breach`, `degenerate_geometry`, `non_finite_control`.
    pub reason: String,
    pub channel: Option<String>,
    pub xi: Option<f64>,
    pub m_lower: Option<f64>,
    pub m_upper: Option<f64>,
}

impl From<&HaltDiagnostic> for HaltJson {
    fn from(d: &HaltDiagnostic) -> Self {
        match d.reason {
            HaltReason::EnvelopeBreach {
                channel,
                xi,
                m_lower,
                m_upper,
            } => Self {
                t: d.t,
                step: d.step,
                vehicle: d.vehicle,
                reason: "envelope_breach".into(),
                channel: Some(channel.as_str().into()),
                xi: Some(xi),
                m_lower: Some(m_lower),
                m_upper: Some(m_upper),
            },
            HaltReason::DegenerateGeometry => Self {
                t: d.t,
                step: d.step,
                vehicle: d.vehicle,
                reason: "degenerate_geometry".into(),
                channel: None,
                xi: None,
                m_lower: None,
                m_upper: None,
            },
            HaltReason::NonFiniteControl => Self {
                t: d.t,
                step: d.step,
                vehicle: d.vehicle,
                reason: "non_finite_control".into(),
                channel: None,
                xi: None,
                m_lower: None,
                m_upper: None,
            },
        }
    }
}

impl HaltJson {
    /// Rebuilds the engine-side diagnostic (used when recomputing a report
    /// from a re-read trace).
    pub fn to_diagnostic(&self) -> Option<HaltDiagnostic> {
        let reason = match self.reason.as_str() {
            "envelope_breach" => HaltReason::EnvelopeBreach {
                channel: match self.channel.as_deref() {
                    Some("distance") => Channel::Distance,
                    Some("bearing") => Channel::Bearing,
                    _ => return None,
                },
                xi: self.xi?,
                m_lower: self.m_lower?,
                m_upper: self.m_upper?,
            },
            "degenerate_geometry" => HaltReason::DegenerateGeometry,
            "non_finite_control" => HaltReason::NonFiniteControl,
            _ => return None,
        };
        Some(HaltDiagnostic {
            t: self.t,
            step: self.step,
            vehicle: self.vehicle,
            reason,
        })
    }
}

/// Serialized form of a run report. Key names are stable; see the README
/// for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema_version: i64,
    pub steps_planned: usize,
    pub rows_recorded: usize,
    pub completed: bool,
    pub halt: Option<HaltJson>,
    pub envelope_violations_distance: CounterJson,
    pub envelope_violations_bearing: CounterJson,
    pub collision_flags: CounterJson,
    pub connectivity_flags: CounterJson,
    pub pair_distance: Vec<PairRangeJson>,
    pub max_abs_bearing: f64,
    pub max_abs_v: f64,
    pub max_abs_omega: f64,
    pub saturation_warnings: usize,
    pub soft_guard_events: usize,
    pub tail_start: f64,
    pub tail_max_abs_e_d: Option<f64>,
    pub tail_max_abs_e_beta: Option<f64>,
    pub wall_clock_seconds: Option<f64>,
    pub seed: Option<u64>,
}

impl ReportJson {
    pub fn from_report(r: &RunReport) -> Self {
        Self {
            schema_version: 1,
            steps_planned: r.steps_planned,
            rows_recorded: r.rows_recorded,
            completed: r.completed,
            halt: r.halt.as_ref().map(HaltJson::from),
            envelope_violations_distance: r.envelope_violations_distance.into(),
            envelope_violations_bearing: r.envelope_violations_bearing.into(),
            collision_flags: r.collision_flags.into(),
            connectivity_flags: r.connectivity_flags.into(),
            pair_distance: r
                .pair_distance
                .iter()
                .enumerate()
                .map(|(i, p): (usize, &PairRange)| PairRangeJson {
                    vehicle: i + 1,
                    min: p.min,
                    max: p.max,
                })
                .collect(),
            max_abs_bearing: r.max_abs_bearing,
            max_abs_v: r.max_abs_v,
            max_abs_omega: r.max_abs_omega,
            saturation_warnings: r.saturation_warnings,
            soft_guard_events: r.soft_guard_events,
            tail_start: r.tail_start,
            tail_max_abs_e_d: r.tail_max_abs_e_d,
            tail_max_abs_e_beta: r.tail_max_abs_e_beta,
            wall_clock_seconds: r.wall_clock_seconds,
            seed: r.seed,
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        fs::write(path, text)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
