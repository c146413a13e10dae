//! Self-verification oracle suite.
//!
//! Each check pits an implementation path against an independent route to
//! the same quantity: the modulation gain against a five-point numerical
//! derivative of the transformation, the transformation against its closed
//! -form inverse, the scalar error dynamics against the stacked matrix
//! form on random admissible states, analytic rates against centered
//! differences of an integrated trace, and logged controls against a
//! bitwise recomputation from logged measurements alone.

use std::f64::consts::PI;
use std::fmt;

use platoon_core::controller::ControllerParams;
use platoon_core::envelope::{self, Envelope};
use platoon_core::kinematics::{ControlInput, LeaderTrajectory, Pose};
use platoon_core::simulator::{
    decentralization_audit, error_dynamics_rhs, finite_difference_audit, poses_from_triples,
    run, InitialTriple, Scenario, SimResult, VectorFormState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check {:<38} residual {:>12.4e}  tolerance {:>8.1e}  {}{}",
            self.name,
            self.residual,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" },
            if self.detail.is_empty() {
                String::new()
            } else {
                format!("  ({})", self.detail)
            }
        )
    }
}

fn result(name: impl Into<String>, residual: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        residual,
        tolerance,
        passed: residual <= tolerance,
        detail,
    }
}

/// Five-point central derivative (the middle point is unused); O(h^4).
pub fn central_derivative_5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let r3 = 0.5 * (f(x + h) - f(x - h));
    let r5 = (4.0 / 3.0) * (f(x + h / 2.0) - f(x - h / 2.0)) - (1.0 / 3.0) * r3;
    r5 / h
}

/// Uniform grid of `points` values spanning the central 99.9 % of the open
/// envelope band.
pub fn envelope_grid(env: &Envelope, points: usize) -> Vec<f64> {
    let width = env.m_lower + env.m_upper;
    let margin = 0.0005 * width;
    let lo = -env.m_lower + margin;
    let hi = env.m_upper - margin;
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Modulation gain vs. numerical derivative of the transformation,
/// relative, on a 10001-point grid.
pub fn derivative_identity_check(env: &Envelope, label: &str) -> CheckResult {
    let h = 1e-6 * (env.m_lower + env.m_upper);
    let f = |x: f64| envelope::transform(x, env).expect("grid stays inside the band");
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for xi in envelope_grid(env, 10_001) {
        let r = envelope::modulation(xi, env).unwrap();
        let fd = central_derivative_5(f, xi, h);
        let rel = ((fd - r) / r).abs();
        if rel > worst {
            worst = rel;
            at = xi;
        }
    }
    result(
        format!("derivative-identity[{label}]"),
        worst,
        1e-6,
        format!("worst at xi = {at:.6}"),
    )
}

/// Transformation round trip xi -> eps -> xi, relative, on the same grid.
pub fn round_trip_check(env: &Envelope, label: &str) -> CheckResult {
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for xi in envelope_grid(env, 10_001) {
        let eps = envelope::transform(xi, env).unwrap();
        let back = envelope::inverse_transform(eps, env);
        let rel = if xi == 0.0 {
            back.abs()
        } else {
            ((back - xi) / xi).abs()
        };
        if rel > worst {
            worst = rel;
            at = xi;
        }
    }
    result(
        format!("transform-round-trip[{label}]"),
        worst,
        1e-12,
        format!("worst at xi = {at:.6}"),
    )
}

/// Random admissible platoon state shared by the dynamics checks.
fn random_state(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Pose>, Vec<ControlInput>) {
    let leader = Pose::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-PI..PI),
    );
    let triples: Vec<_> = (0..n)
        .map(|_| InitialTriple {
            d: rng.random_range(0.1..1.9),
            beta: rng.random_range(-0.99..0.99) * PI / 4.0,
            gamma: rng.random_range(-1.2..1.2),
        })
        .collect();
    let mut poses = vec![leader];
    poses.extend(poses_from_triples(leader, &triples));
    let inputs: Vec<_> = (0..=n)
        .map(|_| ControlInput::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)))
        .collect();
    (poses, inputs)
}

/// Scalar vs. stacked error dynamics on 1000 random admissible states for
/// each platoon size in {1, 2, 3, 8}; absolute agreement.
pub fn dynamics_equivalence_check(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_n = 0;
    for n in [1usize, 2, 3, 8] {
        for _ in 0..1000 {
            let (poses, inputs) = random_state(&mut rng, n);
            let scalar = error_dynamics_rhs(&poses, &inputs).expect("admissible state");
            let d_des = vec![0.75; n];
            let stacked = VectorFormState::build(&poses, &inputs, &d_des).unwrap();
            let (dd, bb) = stacked.rhs();
            for i in 0..n {
                let e = (dd[i] - scalar[i].d_dot)
                    .abs()
                    .max((bb[i] - scalar[i].beta_dot).abs());
                if e > worst {
                    worst = e;
                    worst_n = n;
                }
            }
        }
    }
    result(
        "dynamics-equivalence",
        worst,
        1e-12,
        format!("4000 random states, worst at N = {worst_n}"),
    )
}

/// Centered differences of the recorded errors vs. analytic rates on a
/// finished run.
pub fn fd_audit_check(outcome: &SimResult) -> CheckResult {
    match finite_difference_audit(&outcome.trace) {
        Ok(audit) => {
            let worst = audit.distance.max_abs.max(audit.bearing.max_abs);
            result(
                "finite-difference-audit",
                worst,
                5e-3,
                format!(
                    "distance {:.3e} @ t = {:.3}, bearing {:.3e} @ t = {:.3}, {} rows",
                    audit.distance.max_abs,
                    audit.distance.at_time,
                    audit.bearing.max_abs,
                    audit.bearing.at_time,
                    audit.rows_audited
                ),
            )
        }
        Err(e) => CheckResult {
            name: "finite-difference-audit".into(),
            residual: f64::INFINITY,
            tolerance: 5e-3,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Bitwise recomputation of every logged control from logged measurements.
pub fn decentralization_check(outcome: &SimResult, controllers: &[ControllerParams]) -> CheckResult {
    match decentralization_audit(&outcome.trace, controllers) {
        Ok(checked) => result(
            "decentralization-audit",
            0.0,
            0.5,
            format!("{checked} controls recomputed bitwise"),
        ),
        Err(m) => CheckResult {
            name: "decentralization-audit".into(),
            residual: 1.0,
            tolerance: 0.5,
            passed: false,
            detail: m.to_string(),
        },
    }
}

/// Equilibrium platoon with a parked leader must stay bitwise fixed with
/// exactly zero controls for 10000 steps.
pub fn equilibrium_check(template: &Scenario) -> CheckResult {
    let n = template.n_followers();
    let d_des = template.controllers[0].d_des;
    let triples = vec![
        InitialTriple {
            d: d_des,
            beta: 0.0,
            gamma: 0.0,
        };
        n
    ];
    let leader = Pose::new(0.0, 0.0, 0.0);
    let scenario = Scenario {
        trajectory: LeaderTrajectory::Constant { v: 0.0, omega: 0.0 },
        leader_pose: leader,
        follower_poses: poses_from_triples(leader, &triples),
        duration: 10_000.0 * template.dt,
        ..template.clone()
    };
    let out = match run(&scenario) {
        Ok(out) => out,
        Err(e) => {
            return CheckResult {
                name: "equilibrium-fixed-point".into(),
                residual: f64::INFINITY,
                tolerance: 0.5,
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let first = &out.trace.rows[0];
    let mut drift = 0usize;
    let mut nonzero = 0usize;
    for row in &out.trace.rows {
        for (a, b) in first.poses.iter().zip(row.poses.iter()) {
            if a.x.to_bits() != b.x.to_bits()
                || a.y.to_bits() != b.y.to_bits()
                || a.phi.to_bits() != b.phi.to_bits()
            {
                drift += 1;
            }
        }
        for u in &row.controls[1..] {
            if u.v != 0.0 || u.omega != 0.0 {
                nonzero += 1;
            }
        }
    }
    result(
        "equilibrium-fixed-point",
        (drift + nonzero) as f64,
        0.5,
        format!("{} rows, {drift} drifted poses, {nonzero} nonzero controls", out.trace.rows.len()),
    )
}

/// The full suite against one scenario (run once, shared by the run-based
/// checks). Returns the check list; `all(passed)` is the gate.
pub fn standard_checks(scenario: &Scenario) -> Result<Vec<CheckResult>, String> {
    let env_d = scenario.controllers[0].env_d;
    let env_b = scenario.controllers[0].env_beta;
    let outcome = run(scenario).map_err(|e| e.to_string())?;
    let mut checks = vec![
        derivative_identity_check(&env_d, "distance"),
        derivative_identity_check(&env_b, "bearing"),
        round_trip_check(&env_d, "distance"),
        round_trip_check(&env_b, "bearing"),
        dynamics_equivalence_check(0x5eed),
        fd_audit_check(&outcome),
        decentralization_check(&outcome, &scenario.controllers),
        equilibrium_check(scenario),
    ];
    if !outcome.report.is_clean() {
        checks.push(CheckResult {
            name: "scenario-clean-run".into(),
            residual: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
            detail: match &outcome.report.halt {
                Some(h) => h.to_string(),
                None => format!(
                    "violations: distance {}, bearing {}",
                    outcome.report.envelope_violations_distance.count,
                    outcome.report.envelope_violations_bearing.count
                ),
            },
        });
    }
    Ok(checks)
}

/// Residuals of the finite-difference audit across integration steps;
/// rows of `(dt, distance residual, bearing residual)`.
pub fn dt_sweep(template: &Scenario, dts: &[f64]) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let scenario = Scenario {
            dt,
            ..template.clone()
        };
        let out = run(&scenario).map_err(|e| e.to_string())?;
        let audit = finite_difference_audit(&out.trace).map_err(|e| e.to_string())?;
        rows.push((dt, audit.distance.max_abs, audit.bearing.max_abs));
    }
    Ok(rows)
}
