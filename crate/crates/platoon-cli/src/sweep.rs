//! Parameter sweeps: one run per axis value, executed in parallel (one
//! engine per scenario), aggregated into a comparison report.

use std::time::Instant;

use platoon_core::kinematics::LeaderTrajectory;
use platoon_core::simulator::run;
use serde::{Deserialize, Serialize};

use crate::config::{Config, ConfigErrors};
use crate::report::ReportJson;

pub const SUPPORTED_AXES: &[&str] = &[
    "controller.k_d",
    "controller.k_beta",
    "envelope.decay_d",
    "envelope.decay_beta",
    "scenario.dt",
    "scenario.duration",
    "leader.v",
];

/// Applies one numeric axis value to a copy of the configuration. Short
/// names (`k_d`, `dt`, ...) are accepted as well as full paths.
pub fn apply_axis(config: &Config, axis: &str, value: f64) -> Result<Config, String> {
    let mut c = config.clone();
    let n = c.n_followers;
    match axis {
        "controller.k_d" | "k_d" => c.k_d = vec![value; n],
        "controller.k_beta" | "k_beta" => c.k_beta = vec![value; n],
        "envelope.decay_d" | "decay_d" => c.decay_d = value,
        "envelope.decay_beta" | "decay_beta" => c.decay_beta = value,
        "scenario.dt" | "dt" => c.dt = value,
        "scenario.duration" | "duration" => c.duration = value,
        "leader.v" | "v" => match &mut c.trajectory {
            LeaderTrajectory::Constant { v, .. } => *v = value,
            LeaderTrajectory::SinusoidalOmega { v, .. } => *v = value,
            LeaderTrajectory::Schedule { .. } => {
                return Err("leader.v cannot sweep a schedule trajectory".into())
            }
        },
        other => {
            return Err(format!(
                "axis \"{other}\" is not a sweepable numeric path; supported: {}",
                SUPPORTED_AXES.join(", ")
            ))
        }
    }
    Ok(c)
}

/// One sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: ReportJson,
}

/// Aggregated sweep output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_clean(&self) -> bool {
        self.rows.iter().all(|r| {
            r.report.completed
                && r.report.envelope_violations_distance.count == 0
                && r.report.envelope_violations_bearing.count == 0
                && r.report.collision_flags.count == 0
                && r.report.connectivity_flags.count == 0
        })
    }
}

/// Builds every scenario up front (all configuration errors surface before
/// any run), then executes them in parallel and aggregates in input order.
pub fn run_sweep(
    config: &Config,
    axis: &str,
    values: &[f64],
    seed: Option<u64>,
) -> Result<SweepReport, ConfigErrors> {
    if values.is_empty() {
        return Err(ConfigErrors {
            errors: vec!["sweep: empty value list".into()],
        });
    }
    let mut errors = Vec::new();
    let mut scenarios = Vec::with_capacity(values.len());
    for &value in values {
        match apply_axis(config, axis, value) {
            Ok(c) => match c.to_scenario() {
                Ok(s) => scenarios.push((value, s)),
                Err(e) => errors.extend(
                    e.errors
                        .into_iter()
                        .map(|msg| format!("{axis} = {value}: {msg}")),
                ),
            },
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors { errors });
    }

    let rows: Vec<SweepRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|(value, scenario)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let mut out = run(scenario).expect("scenario validated before the sweep");
                    out.report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
                    out.report.seed = seed;
                    SweepRow {
                        value: *value,
                        report: ReportJson::from_report(&out.report),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker")).collect()
    });

    Ok(SweepReport {
        axis: axis.to_string(),
        rows,
    })
}
