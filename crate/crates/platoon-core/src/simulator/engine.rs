//! The closed-loop stepping engine and its run artifacts.
//!
//! Stepping is single-threaded and owns all state; determinism is bitwise
//! (identical scenarios give identical traces). Per tick, each follower is
//! measured against its predecessor, the envelope monitor classifies the
//! errors with exactly the comparisons the control law itself uses, and the
//! controller output is zero-order-held over the step. Vehicle 1 measures
//! the leader; the leader is never controlled by the protocol.

use alloc::vec::Vec;
use core::fmt;

use crate::controller::{controller_step, ControllerParams};
use crate::envelope::{normalize, Channel};
use crate::geometry::{constraint_status, relative_measurement, ConstraintStatus, Measurement};
use crate::kinematics::{integrate_step, leader_command, ControlInput, Pose};
use crate::simulator::scenario::{BreachPolicy, Scenario, ScenarioError};

/// Everything recorded about one follower at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerRecord {
    pub measurement: Measurement,
    pub e_d: f64,
    pub e_beta: f64,
    pub xi_d: f64,
    pub xi_beta: f64,
    pub rho_d: f64,
    pub rho_beta: f64,
    /// Envelope band in raw error units at this time.
    pub lb_d: f64,
    pub ub_d: f64,
    pub lb_beta: f64,
    pub ub_beta: f64,
    pub status: ConstraintStatus,
}

/// One tick of the run: poses and the controls computed at this time
/// (held over the following step), plus per-follower records. Row 0 is the
/// initial condition before any control has acted on the state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Leader first, then followers front to back.
    pub poses: Vec<Pose>,
    /// Same order as `poses`.
    pub controls: Vec<ControlInput>,
    pub followers: Vec<FollowerRecord>,
}

/// Time-indexed record of a run, uniformly spaced by `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub n_followers: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn final_time(&self) -> f64 {
        self.rows.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Why a run stopped before its planned duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HaltReason {
    EnvelopeBreach {
        channel: Channel,
        xi: f64,
        m_lower: f64,
        m_upper: f64,
    },
    /// Follower and predecessor positions coincided.
    DegenerateGeometry,
    /// The control law produced a non-finite command.
    NonFiniteControl,
}

/// Halt event, attributed to a vehicle and tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaltDiagnostic {
    pub t: f64,
    pub step: usize,
    /// Follower index, 1-based.
    pub vehicle: usize,
    pub reason: HaltReason,
}

impl fmt::Display for HaltDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "halted at t = {} (step {}), vehicle {}: ", self.t, self.step, self.vehicle)?;
        match self.reason {
            HaltReason::EnvelopeBreach {
                channel,
                xi,
                m_lower,
                m_upper,
            } => write!(
                f,
                "{channel} envelope breach, normalized error {xi} outside ({}, {})",
                -m_lower, m_upper
            ),
            HaltReason::DegenerateGeometry => f.write_str("coincident vehicle positions"),
            HaltReason::NonFiniteControl => f.write_str("non-finite control output"),
        }
    }
}

/// Violation counter for one kind of event.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelCounter {
    pub count: usize,
    pub first_time: Option<f64>,
}

impl ChannelCounter {
    fn record(&mut self, t: f64) {
        self.count += 1;
        if self.first_time.is_none() {
            self.first_time = Some(t);
        }
    }
}

/// Observed distance range of one follower/predecessor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRange {
    pub min: f64,
    pub max: f64,
}

/// Summary of a run; every statistic is recomputable from the trace (plus
/// the halt diagnostic) it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub steps_planned: usize,
    pub rows_recorded: usize,
    pub completed: bool,
    pub halt: Option<HaltDiagnostic>,
    pub envelope_violations_distance: ChannelCounter,
    pub envelope_violations_bearing: ChannelCounter,
    pub collision_flags: ChannelCounter,
    pub connectivity_flags: ChannelCounter,
    /// Per follower, front to back.
    pub pair_distance: Vec<PairRange>,
    pub max_abs_bearing: f64,
    /// Largest commanded |v| / |omega| over all followers and ticks.
    pub max_abs_v: f64,
    pub max_abs_omega: f64,
    pub saturation_warnings: usize,
    pub soft_guard_events: usize,
    /// Steady-state window: rows with `t >= tail_start` count toward the
    /// tail maxima. `None` maxima mean the run never reached the window.
    pub tail_start: f64,
    pub tail_max_abs_e_d: Option<f64>,
    pub tail_max_abs_e_beta: Option<f64>,
    /// Stamped by callers that have a clock; the engine itself does not.
    pub wall_clock_seconds: Option<f64>,
    /// Provenance stamp only; the pipeline is noise-free.
    pub seed: Option<u64>,
}

impl RunReport {
    /// True when the run completed with no envelope violations and no
    /// constraint flags.
    pub fn is_clean(&self) -> bool {
        self.completed
            && self.envelope_violations_distance.count == 0
            && self.envelope_violations_bearing.count == 0
            && self.collision_flags.count == 0
            && self.connectivity_flags.count == 0
    }

    /// Builds the report from a trace. Envelope violations are any recorded
    /// normalized errors on or outside the open band (beyond the soft-guard
    /// margin when one is configured; grazes inside the margin count as
    /// soft-guard events), plus the halting breach itself.
    pub fn compute(trace: &Trace, scenario: &Scenario, halt: Option<HaltDiagnostic>) -> Self {
        let n = scenario.n_followers();
        let mut report = RunReport {
            steps_planned: scenario.steps(),
            rows_recorded: trace.rows.len(),
            completed: halt.is_none(),
            halt,
            envelope_violations_distance: ChannelCounter::default(),
            envelope_violations_bearing: ChannelCounter::default(),
            collision_flags: ChannelCounter::default(),
            connectivity_flags: ChannelCounter::default(),
            pair_distance: alloc::vec![
                PairRange {
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                };
                n
            ],
            max_abs_bearing: 0.0,
            max_abs_v: 0.0,
            max_abs_omega: 0.0,
            saturation_warnings: 0,
            soft_guard_events: 0,
            tail_start: scenario.duration * (1.0 - scenario.tail_fraction),
            tail_max_abs_e_d: None,
            tail_max_abs_e_beta: None,
            wall_clock_seconds: None,
            seed: None,
        };

        for row in &trace.rows {
            for (i, rec) in row.followers.iter().enumerate() {
                let p = &scenario.controllers[i];
                report.classify_envelope(rec.xi_d, p.env_d.m_lower, p.env_d.m_upper, p.soft_guard, Channel::Distance, row.t);
                report.classify_envelope(rec.xi_beta, p.env_beta.m_lower, p.env_beta.m_upper, p.soft_guard, Channel::Bearing, row.t);
                match rec.status {
                    ConstraintStatus::Ok => {}
                    ConstraintStatus::Collision => report.collision_flags.record(row.t),
                    ConstraintStatus::ConnectivityBreak => {
                        report.connectivity_flags.record(row.t)
                    }
                }
                let pr = &mut report.pair_distance[i];
                pr.min = pr.min.min(rec.measurement.d);
                pr.max = pr.max.max(rec.measurement.d);
                report.max_abs_bearing = report.max_abs_bearing.max(rec.measurement.beta.abs());
                let u = row.controls[i + 1];
                report.max_abs_v = report.max_abs_v.max(u.v.abs());
                report.max_abs_omega = report.max_abs_omega.max(u.omega.abs());
                if let Some(sat) = p.saturation {
                    if u.v.abs() > sat.v_max {
                        report.saturation_warnings += 1;
                    }
                    if u.omega.abs() > sat.omega_max {
                        report.saturation_warnings += 1;
                    }
                }
                if row.t >= report.tail_start {
                    let d = report.tail_max_abs_e_d.get_or_insert(0.0);
                    *d = d.max(rec.e_d.abs());
                    let b = report.tail_max_abs_e_beta.get_or_insert(0.0);
                    *b = b.max(rec.e_beta.abs());
                }
            }
        }

        if let Some(diag) = &report.halt {
            if let HaltReason::EnvelopeBreach { channel, .. } = diag.reason {
                match channel {
                    Channel::Distance => report.envelope_violations_distance.record(diag.t),
                    Channel::Bearing => report.envelope_violations_bearing.record(diag.t),
                }
            }
        }
        report
    }

    fn classify_envelope(
        &mut self,
        xi: f64,
        m_lower: f64,
        m_upper: f64,
        soft_guard: Option<f64>,
        channel: Channel,
        t: f64,
    ) {
        let inside = -m_lower < xi && xi < m_upper;
        if inside {
            return;
        }
        let within_guard = soft_guard
            .map(|g| (xi >= m_upper && xi <= m_upper + g) || (xi <= -m_lower && xi >= -m_lower - g))
            .unwrap_or(false);
        if within_guard {
            self.soft_guard_events += 1;
        } else {
            match channel {
                Channel::Distance => self.envelope_violations_distance.record(t),
                Channel::Bearing => self.envelope_violations_bearing.record(t),
            }
        }
    }
}

/// A finished run: the full-resolution trace and its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trace: Trace,
    pub report: RunReport,
}

/// Closed-loop stepping state. [`run`] drives one of these to completion;
/// the type is public so callers can step scenarios tick by tick.
#[derive(Debug, Clone)]
pub struct Engine {
    scenario: Scenario,
    poses: Vec<Pose>,
    last_controls: Vec<ControlInput>,
    step_index: usize,
}

impl Engine {
    /// Validates the scenario and positions the platoon at its initial
    /// state.
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let mut poses = Vec::with_capacity(scenario.n_followers() + 1);
        poses.push(scenario.leader_pose);
        poses.extend_from_slice(&scenario.follower_poses);
        let last_controls = alloc::vec![ControlInput::default(); poses.len()];
        Ok(Self {
            scenario,
            poses,
            last_controls,
            step_index: 0,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.scenario.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Current poses, leader first.
    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    /// Measures, monitors, and computes controls at the current time
    /// without advancing the state. Under the record-and-continue policy a
    /// breached follower is frozen at its last valid command; under halt,
    /// the diagnostic is returned instead of a row.
    pub fn evaluate(&mut self) -> Result<TraceRow, HaltDiagnostic> {
        let t = self.time();
        let n = self.scenario.n_followers();
        let mut controls = Vec::with_capacity(n + 1);
        controls.push(leader_command(&self.scenario.trajectory, t));
        let mut followers = Vec::with_capacity(n);

        for i in 1..=n {
            let params = &self.scenario.controllers[i - 1];
            let diag = |reason: HaltReason| HaltDiagnostic {
                t,
                step: self.step_index,
                vehicle: i,
                reason,
            };
            let m = match relative_measurement(self.poses[i], self.poses[i - 1]) {
                Ok(m) => m,
                Err(_) => return Err(diag(HaltReason::DegenerateGeometry)),
            };
            let e_d = m.d - params.d_des;
            let e_beta = m.beta;
            let rho_d = params.env_d.rho(t);
            let rho_beta = params.env_beta.rho(t);
            let (lb_d, ub_d) = params.env_d.band(t);
            let (lb_beta, ub_beta) = params.env_beta.band(t);

            let control = match controller_step(m, t, params) {
                Ok(out) => {
                    if !out.control.is_finite() {
                        return Err(diag(HaltReason::NonFiniteControl));
                    }
                    self.last_controls[i] = out.control;
                    out.control
                }
                Err(err) => match self.scenario.breach_policy {
                    BreachPolicy::Halt => {
                        return Err(diag(HaltReason::EnvelopeBreach {
                            channel: err.channel,
                            xi: err.breach.xi,
                            m_lower: err.breach.m_lower,
                            m_upper: err.breach.m_upper,
                        }))
                    }
                    // Hold the last valid command; the violation is visible
                    // in the recorded normalized errors.
                    BreachPolicy::RecordAndContinue => self.last_controls[i],
                },
            };

            controls.push(control);
            followers.push(FollowerRecord {
                measurement: m,
                e_d,
                e_beta,
                xi_d: normalize(e_d, rho_d),
                xi_beta: normalize(e_beta, rho_beta),
                rho_d,
                rho_beta,
                lb_d,
                ub_d,
                lb_beta,
                ub_beta,
                status: constraint_status(m, self.scenario.constraints),
            });
        }

        Ok(TraceRow {
            t,
            poses: self.poses.clone(),
            controls,
            followers,
        })
    }

    /// Integrates every vehicle one step under the row's zero-order-held
    /// controls.
    pub fn advance(&mut self, row: &TraceRow) {
        for (i, pose) in self.poses.iter_mut().enumerate() {
            *pose = integrate_step(
                *pose,
                row.controls[i],
                self.scenario.dt,
                self.scenario.integrator,
            );
        }
        self.step_index += 1;
    }
}

/// Runs a scenario to completion (or halt) and summarizes it.
pub fn run(scenario: &Scenario) -> Result<SimResult, ScenarioError> {
    let mut engine = Engine::new(scenario.clone())?;
    let steps = scenario.steps();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut halt = None;

    for k in 0..=steps {
        match engine.evaluate() {
            Ok(row) => {
                if k < steps {
                    engine.advance(&row);
                }
                rows.push(row);
            }
            Err(diag) => {
                halt = Some(diag);
                break;
            }
        }
    }

    let trace = Trace {
        dt: scenario.dt,
        n_followers: scenario.n_followers(),
        rows,
    };
    let report = RunReport::compute(&trace, scenario, halt);
    Ok(SimResult { trace, report })
}

/// Mismatch found by [`decentralization_audit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditMismatch {
    pub t: f64,
    pub vehicle: usize,
    pub logged: ControlInput,
    pub recomputed: ControlInput,
}

impl fmt::Display for AuditMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vehicle {} at t = {}: logged ({}, {}) but recomputed ({}, {})",
            self.vehicle,
            self.t,
            self.logged.v,
            self.logged.omega,
            self.recomputed.v,
            self.recomputed.omega
        )
    }
}

/// Recomputes every follower's logged control from nothing but its own
/// logged `(d, beta, t)` and parameters, and demands bitwise agreement.
///
/// Ticks whose normalized errors sit outside the open band (frozen under
/// the record policy) are skipped: the logged command there is a hold, not
/// a law evaluation. Returns the number of (row, vehicle) pairs checked.
pub fn decentralization_audit(
    trace: &Trace,
    controllers: &[ControllerParams],
) -> Result<usize, AuditMismatch> {
    let mut checked = 0;
    for row in &trace.rows {
        for (i, rec) in row.followers.iter().enumerate() {
            let p = &controllers[i];
            let in_d = -p.env_d.m_lower < rec.xi_d && rec.xi_d < p.env_d.m_upper;
            let in_b = -p.env_beta.m_lower < rec.xi_beta && rec.xi_beta < p.env_beta.m_upper;
            if !(in_d && in_b) {
                continue;
            }
            let out = match controller_step(rec.measurement, row.t, p) {
                Ok(out) => out,
                Err(_) => continue,
            };
            let logged = row.controls[i + 1];
            if out.control.v.to_bits() != logged.v.to_bits()
                || out.control.omega.to_bits() != logged.omega.to_bits()
            {
                return Err(AuditMismatch {
                    t: row.t,
                    vehicle: i + 1,
                    logged,
                    recomputed: out.control,
                });
            }
            checked += 1;
        }
    }
    Ok(checked)
}
