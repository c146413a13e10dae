//! Configuration ingestion: a schema-versioned TOML tree mirroring the
//! scenario, parsed with full error collection.
//!
//! Parsing never stops at the first problem: missing keys, unknown keys,
//! unit errors, and cross-field inconsistencies are all gathered into one
//! [`ConfigErrors`] so a broken file can be fixed in a single pass. All
//! dimensioned values carry explicit units (see [`crate::units`]); bare
//! numbers are accepted only for dimensionless fields (gains, decay rates,
//! fractions, counts).

use std::fmt;

use platoon_core::controller::{ControllerParams, Saturation};
use platoon_core::envelope;
use platoon_core::geometry::{CameraModel, Constraints};
use platoon_core::kinematics::{Integrator, LeaderTrajectory, Pose, ScheduleSegment};
use platoon_core::simulator::{poses_from_triples, BreachPolicy, InitialTriple, Scenario};

use crate::units::{format_quantity, parse_quantity, Dimension};

/// Every problem found while parsing or validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors {
    pub errors: Vec<String>,
}

impl ConfigErrors {
    fn new() -> Self {
        Self { errors: Vec::new() }
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration rejected ({} errors):", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Initial platoon layout, as written in the file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLayout {
    /// Absolute poses, front to back.
    Poses(Vec<Pose>),
    /// Relative (distance, bearing, relative-heading) triples, resolved
    /// front to back starting at the leader.
    Triples(Vec<InitialTriple>),
}

/// Output file options.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub trace: String,
    pub report: String,
    pub plot_data: bool,
    pub decimation: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trace: "trace.csv".into(),
            report: "report.json".into(),
            plot_data: false,
            decimation: 1,
        }
    }
}

/// Fully typed configuration; angles in radians, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub schema_version: i64,
    pub n_followers: usize,
    pub dt: f64,
    pub duration: f64,
    pub integrator: Integrator,
    pub breach_policy: BreachPolicy,
    pub tail_fraction: f64,
    pub trajectory: LeaderTrajectory,
    pub leader_pose: Pose,
    pub camera: CameraModel,
    pub constraints: Constraints,
    /// Per-vehicle gain/spacing vectors, expanded from scalars when the
    /// file used the uniform shorthand.
    pub k_d: Vec<f64>,
    pub k_beta: Vec<f64>,
    pub d_des: Vec<f64>,
    pub decay_d: f64,
    pub decay_beta: f64,
    pub rho_inf_d: f64,
    pub rho_inf_beta: f64,
    pub soft_guard: Option<f64>,
    pub saturation: Option<Saturation>,
    pub initial: InitialLayout,
    pub output: OutputConfig,
}

type Table = toml::value::Table;
type Value = toml::Value;

fn value_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn section<'a>(&mut self, root: &'a Table, name: &str) -> Option<&'a Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.errors.push(format!("[{name}] must be a table"));
                None
            }
            None => {
                self.errors.push(format!("missing [{name}] section"));
                None
            }
        }
    }

    fn check_unknown(&mut self, table: &Table, path: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                self.errors.push(format!("unknown key \"{path}{key}\""));
            }
        }
    }

    fn require<'a>(&mut self, table: &'a Table, path: &str, key: &str) -> Option<&'a Value> {
        match table.get(key) {
            Some(v) => Some(v),
            None => {
                self.errors.push(format!("missing key \"{path}{key}\""));
                None
            }
        }
    }

    fn quantity_of(&mut self, v: &Value, path: String, dim: Dimension) -> Option<f64> {
        match v {
            Value::String(s) => match parse_quantity(s, dim) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.errors.push(format!("{path}: {e}"));
                    None
                }
            },
            _ => {
                self.errors.push(format!(
                    "{path}: dimensioned values must be strings like \"0.75 {}\"",
                    dim.expected_units().split(' ').next().unwrap_or("m")
                ));
                None
            }
        }
    }

    fn req_quantity(&mut self, t: &Table, path: &str, key: &str, dim: Dimension) -> Option<f64> {
        let v = self.require(t, path, key)?;
        self.quantity_of(v, format!("{path}{key}"), dim)
    }

    fn req_f64(&mut self, t: &Table, path: &str, key: &str) -> Option<f64> {
        let v = self.require(t, path, key)?;
        match value_f64(v) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.errors
                    .push(format!("{path}{key}: expected a finite number"));
                None
            }
        }
    }

    fn req_str<'a>(&mut self, t: &'a Table, path: &str, key: &str) -> Option<&'a str> {
        let v = self.require(t, path, key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.errors.push(format!("{path}{key}: expected a string"));
                None
            }
        }
    }

    fn req_usize(&mut self, t: &Table, path: &str, key: &str) -> Option<usize> {
        let v = self.require(t, path, key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i as usize),
            _ => {
                self.errors
                    .push(format!("{path}{key}: expected a non-negative integer"));
                None
            }
        }
    }

    /// Scalar-or-array expansion for per-vehicle dimensionless values.
    fn per_vehicle_f64(&mut self, t: &Table, path: &str, key: &str, n: usize) -> Option<Vec<f64>> {
        let v = self.require(t, path, key)?;
        match v {
            Value::Array(items) => {
                if items.len() != n {
                    self.errors.push(format!(
                        "{path}{key}: expected {n} entries (one per follower), got {}",
                        items.len()
                    ));
                    return None;
                }
                let mut out = Vec::with_capacity(n);
                for (i, item) in items.iter().enumerate() {
                    match value_f64(item) {
                        Some(x) if x.is_finite() => out.push(x),
                        _ => {
                            self.errors
                                .push(format!("{path}{key}[{i}]: expected a finite number"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            _ => match value_f64(v) {
                Some(x) if x.is_finite() => Some(vec![x; n]),
                _ => {
                    self.errors.push(format!(
                        "{path}{key}: expected a number or an array of {n} numbers"
                    ));
                    None
                }
            },
        }
    }

    /// Scalar-or-array expansion for per-vehicle quantities.
    fn per_vehicle_quantity(
        &mut self,
        t: &Table,
        path: &str,
        key: &str,
        dim: Dimension,
        n: usize,
    ) -> Option<Vec<f64>> {
        let v = self.require(t, path, key)?;
        match v {
            Value::Array(items) => {
                if items.len() != n {
                    self.errors.push(format!(
                        "{path}{key}: expected {n} entries (one per follower), got {}",
                        items.len()
                    ));
                    return None;
                }
                let mut out = Vec::with_capacity(n);
                for (i, item) in items.iter().enumerate() {
                    out.push(self.quantity_of(item, format!("{path}{key}[{i}]"), dim)?);
                }
                Some(out)
            }
            _ => {
                let x = self.quantity_of(v, format!("{path}{key}"), dim)?;
                Some(vec![x; n])
            }
        }
    }
}

impl Config {
    /// Parses a configuration, returning every error rather than the first.
    pub fn parse(text: &str) -> Result<Config, ConfigErrors> {
        let root: Table = match text.parse() {
            Ok(v) => v,
            Err(e) => {
                return Err(ConfigErrors {
                    errors: vec![format!("TOML syntax: {e}")],
                })
            }
        };
        let root = &root;

        let mut w = Walker { errors: Vec::new() };
        w.check_unknown(
            root,
            "",
            &[
                "schema_version",
                "scenario",
                "leader",
                "camera",
                "constraints",
                "controller",
                "envelope",
                "initial",
                "output",
            ],
        );

        let schema_version = match root.get("schema_version").and_then(Value::as_integer) {
            Some(1) => Some(1),
            Some(v) => {
                w.errors
                    .push(format!("unsupported schema_version {v}; expected 1"));
                None
            }
            None => {
                w.errors
                    .push("missing key \"schema_version\" (expected 1)".into());
                None
            }
        };

        // [scenario]
        let mut n_followers = None;
        let mut dt = None;
        let mut duration = None;
        let mut integrator = None;
        let mut breach_policy = None;
        let mut tail_fraction = Some(0.25);
        if let Some(t) = w.section(root, "scenario") {
            let p = "scenario.";
            w.check_unknown(
                t,
                p,
                &["n_followers", "dt", "duration", "integrator", "breach_policy", "tail_fraction"],
            );
            n_followers = w.req_usize(t, p, "n_followers");
            dt = w.req_quantity(t, p, "dt", Dimension::Time);
            duration = w.req_quantity(t, p, "duration", Dimension::Time);
            integrator = match w.req_str(t, p, "integrator") {
                Some("rk4") => Some(Integrator::Rk4),
                Some("euler") => Some(Integrator::Euler),
                Some(other) => {
                    w.errors.push(format!(
                        "scenario.integrator: \"{other}\" is not one of rk4 | euler"
                    ));
                    None
                }
                None => None,
            };
            breach_policy = match w.req_str(t, p, "breach_policy") {
                Some("halt") => Some(BreachPolicy::Halt),
                Some("record") => Some(BreachPolicy::RecordAndContinue),
                Some(other) => {
                    w.errors.push(format!(
                        "scenario.breach_policy: \"{other}\" is not one of halt | record"
                    ));
                    None
                }
                None => None,
            };
            if let Some(v) = t.get("tail_fraction") {
                tail_fraction = match value_f64(v) {
                    Some(x) if x > 0.0 && x <= 1.0 => Some(x),
                    _ => {
                        w.errors
                            .push("scenario.tail_fraction: expected a number in (0, 1]".into());
                        None
                    }
                };
            }
        }

        // [leader]
        let mut trajectory = None;
        let mut leader_pose = None;
        if let Some(t) = w.section(root, "leader") {
            let p = "leader.";
            let kind = w.req_str(t, p, "kind").map(str::to_owned);
            match kind.as_deref() {
                Some("constant") => {
                    w.check_unknown(t, p, &["kind", "v", "omega", "x", "y", "phi"]);
                    let v = w.req_quantity(t, p, "v", Dimension::LinearVelocity);
                    let omega = w.req_quantity(t, p, "omega", Dimension::AngularVelocity);
                    if let (Some(v), Some(omega)) = (v, omega) {
                        trajectory = Some(LeaderTrajectory::Constant { v, omega });
                    }
                }
                Some("sinusoidal") => {
                    w.check_unknown(t, p, &["kind", "v", "amplitude", "frequency", "x", "y", "phi"]);
                    let v = w.req_quantity(t, p, "v", Dimension::LinearVelocity);
                    let amplitude = w.req_quantity(t, p, "amplitude", Dimension::AngularVelocity);
                    let frequency = w.req_quantity(t, p, "frequency", Dimension::AngularVelocity);
                    if let (Some(v), Some(amplitude), Some(frequency)) = (v, amplitude, frequency) {
                        trajectory = Some(LeaderTrajectory::SinusoidalOmega {
                            v,
                            amplitude,
                            frequency,
                        });
                    }
                }
                Some("schedule") => {
                    w.check_unknown(t, p, &["kind", "segments", "x", "y", "phi"]);
                    match w.require(t, p, "segments") {
                        Some(Value::Array(items)) if !items.is_empty() => {
                            let mut segments = Vec::with_capacity(items.len());
                            for (i, item) in items.iter().enumerate() {
                                let sp = format!("leader.segments[{i}].");
                                let Some(seg) = item.as_table() else {
                                    w.errors.push(format!("{sp}: expected a table"));
                                    continue;
                                };
                                w.check_unknown(seg, &sp, &["t", "v", "omega"]);
                                let t_start = w.req_quantity(seg, &sp, "t", Dimension::Time);
                                let v = w.req_quantity(seg, &sp, "v", Dimension::LinearVelocity);
                                let omega =
                                    w.req_quantity(seg, &sp, "omega", Dimension::AngularVelocity);
                                if let (Some(t_start), Some(v), Some(omega)) = (t_start, v, omega) {
                                    segments.push(ScheduleSegment { t_start, v, omega });
                                }
                            }
                            if segments.len() == items.len() {
                                trajectory = Some(LeaderTrajectory::Schedule { segments });
                            }
                        }
                        Some(_) => w
                            .errors
                            .push("leader.segments: expected a non-empty array".into()),
                        None => {}
                    }
                }
                Some(other) => {
                    w.errors.push(format!(
                        "leader.kind: \"{other}\" is not one of constant | schedule | sinusoidal"
                    ));
                }
                None => {}
            }
            let x = w.req_quantity(t, p, "x", Dimension::Length);
            let y = w.req_quantity(t, p, "y", Dimension::Length);
            let phi = w.req_quantity(t, p, "phi", Dimension::Angle);
            if let (Some(x), Some(y), Some(phi)) = (x, y, phi) {
                leader_pose = Some(Pose::new(x, y, phi));
            }
        }

        // [camera]
        let mut camera = None;
        if let Some(t) = w.section(root, "camera") {
            let p = "camera.";
            w.check_unknown(t, p, &["range", "aov"]);
            let range = w.req_quantity(t, p, "range", Dimension::Length);
            let aov = w.req_quantity(t, p, "aov", Dimension::Angle);
            if let (Some(range), Some(aov)) = (range, aov) {
                camera = Some(CameraModel { range, aov });
            }
        }

        // [constraints]
        let mut constraints = None;
        if let Some(t) = w.section(root, "constraints") {
            let p = "constraints.";
            w.check_unknown(t, p, &["d_col", "d_con", "beta_con"]);
            let d_col = w.req_quantity(t, p, "d_col", Dimension::Length);
            let d_con = w.req_quantity(t, p, "d_con", Dimension::Length);
            let beta_con = w.req_quantity(t, p, "beta_con", Dimension::Angle);
            if let (Some(d_col), Some(d_con), Some(beta_con)) = (d_col, d_con, beta_con) {
                constraints = Some(Constraints {
                    d_col,
                    d_con,
                    beta_con,
                });
            }
        }

        // [controller]
        let mut k_d = None;
        let mut k_beta = None;
        let mut d_des = None;
        let mut saturation = None;
        if let Some(t) = w.section(root, "controller") {
            let p = "controller.";
            w.check_unknown(t, p, &["k_d", "k_beta", "d_des", "saturation"]);
            if let Some(n) = n_followers {
                k_d = w.per_vehicle_f64(t, p, "k_d", n);
                k_beta = w.per_vehicle_f64(t, p, "k_beta", n);
                d_des = w.per_vehicle_quantity(t, p, "d_des", Dimension::Length, n);
            }
            if let Some(v) = t.get("saturation") {
                let sp = "controller.saturation.";
                match v.as_table() {
                    Some(sat) => {
                        w.check_unknown(sat, sp, &["v_max", "omega_max", "clamp"]);
                        let v_max = w.req_quantity(sat, sp, "v_max", Dimension::LinearVelocity);
                        let omega_max =
                            w.req_quantity(sat, sp, "omega_max", Dimension::AngularVelocity);
                        let clamp = match sat.get("clamp") {
                            None => Some(false),
                            Some(Value::Boolean(b)) => Some(*b),
                            Some(_) => {
                                w.errors
                                    .push("controller.saturation.clamp: expected a boolean".into());
                                None
                            }
                        };
                        if let (Some(v_max), Some(omega_max), Some(clamp)) = (v_max, omega_max, clamp)
                        {
                            saturation = Some(Saturation {
                                v_max,
                                omega_max,
                                clamp,
                            });
                        }
                    }
                    None => w
                        .errors
                        .push("controller.saturation: expected a table".into()),
                }
            }
        }

        // [envelope]
        let mut decay_d = None;
        let mut decay_beta = None;
        let mut rho_inf_d = None;
        let mut rho_inf_beta = None;
        let mut soft_guard = None;
        if let Some(t) = w.section(root, "envelope") {
            let p = "envelope.";
            w.check_unknown(
                t,
                p,
                &["decay_d", "decay_beta", "rho_inf_d", "rho_inf_beta", "soft_guard"],
            );
            decay_d = w.req_f64(t, p, "decay_d");
            decay_beta = w.req_f64(t, p, "decay_beta");
            rho_inf_d = w.req_quantity(t, p, "rho_inf_d", Dimension::Length);
            rho_inf_beta = w.req_quantity(t, p, "rho_inf_beta", Dimension::Angle);
            if let Some(v) = t.get("soft_guard") {
                match value_f64(v) {
                    Some(x) if x > 0.0 && x.is_finite() => soft_guard = Some(x),
                    _ => w
                        .errors
                        .push("envelope.soft_guard: expected a positive number".into()),
                }
            }
        }

        // [initial]
        let mut initial = None;
        if let Some(t) = w.section(root, "initial") {
            let p = "initial.";
            w.check_unknown(t, p, &["poses", "triples"]);
            match (t.get("poses"), t.get("triples")) {
                (Some(_), Some(_)) => w
                    .errors
                    .push("initial: give either poses or triples, not both".into()),
                (None, None) => w
                    .errors
                    .push("initial: one of poses or triples is required".into()),
                (Some(v), None) => {
                    initial = w.parse_pose_list(v, p).map(InitialLayout::Poses);
                }
                (None, Some(v)) => {
                    initial = w.parse_triple_list(v, p).map(InitialLayout::Triples);
                }
            }
            if let (Some(n), Some(layout)) = (n_followers, &initial) {
                let len = match layout {
                    InitialLayout::Poses(v) => v.len(),
                    InitialLayout::Triples(v) => v.len(),
                };
                if len != n {
                    w.errors.push(format!(
                        "initial: {len} entries for n_followers = {n}"
                    ));
                    initial = None;
                }
            }
        }

        // [output] (optional)
        let mut output = Some(OutputConfig::default());
        if let Some(Value::Table(t)) = root.get("output") {
            let p = "output.";
            w.check_unknown(t, p, &["trace", "report", "plot_data", "decimation"]);
            let mut out = OutputConfig::default();
            let mut ok = true;
            if let Some(v) = t.get("trace") {
                match v.as_str() {
                    Some(s) => out.trace = s.to_owned(),
                    None => {
                        w.errors.push("output.trace: expected a string".into());
                        ok = false;
                    }
                }
            }
            if let Some(v) = t.get("report") {
                match v.as_str() {
                    Some(s) => out.report = s.to_owned(),
                    None => {
                        w.errors.push("output.report: expected a string".into());
                        ok = false;
                    }
                }
            }
            if let Some(v) = t.get("plot_data") {
                match v {
                    Value::Boolean(b) => out.plot_data = *b,
                    _ => {
                        w.errors.push("output.plot_data: expected a boolean".into());
                        ok = false;
                    }
                }
            }
            if let Some(v) = t.get("decimation") {
                match v.as_integer() {
                    Some(i) if i >= 1 => out.decimation = i as usize,
                    _ => {
                        w.errors
                            .push("output.decimation: expected an integer >= 1".into());
                        ok = false;
                    }
                }
            }
            output = ok.then_some(out);
        } else if root.get("output").is_some() {
            w.errors.push("[output] must be a table".into());
            output = None;
        }

        if !w.errors.is_empty() {
            return Err(ConfigErrors { errors: w.errors });
        }

        // All sections parsed cleanly; unwraps here cannot fire.
        Ok(Config {
            schema_version: schema_version.unwrap(),
            n_followers: n_followers.unwrap(),
            dt: dt.unwrap(),
            duration: duration.unwrap(),
            integrator: integrator.unwrap(),
            breach_policy: breach_policy.unwrap(),
            tail_fraction: tail_fraction.unwrap(),
            trajectory: trajectory.unwrap(),
            leader_pose: leader_pose.unwrap(),
            camera: camera.unwrap(),
            constraints: constraints.unwrap(),
            k_d: k_d.unwrap(),
            k_beta: k_beta.unwrap(),
            d_des: d_des.unwrap(),
            decay_d: decay_d.unwrap(),
            decay_beta: decay_beta.unwrap(),
            rho_inf_d: rho_inf_d.unwrap(),
            rho_inf_beta: rho_inf_beta.unwrap(),
            soft_guard,
            saturation,
            initial: initial.unwrap(),
            output: output.unwrap(),
        })
    }

    /// Builds and validates the scenario. When the initial layout is given
    /// as triples, the feasibility gate also checks the stated values
    /// exactly, so boundary placements are rejected even when pose
    /// reconstruction would round an ulp inside.
    pub fn to_scenario(&self) -> Result<Scenario, ConfigErrors> {
        let mut errors = ConfigErrors::new();
        let mut controllers = Vec::with_capacity(self.n_followers);
        for i in 0..self.n_followers {
            match envelope::derive_bounds(self.d_des[i], &self.constraints) {
                Ok(b) => {
                    let env_d =
                        envelope::Envelope::new(b.m_lower_d, b.m_upper_d, self.decay_d, self.rho_inf_d);
                    let env_b =
                        envelope::Envelope::new(b.m_beta, b.m_beta, self.decay_beta, self.rho_inf_beta);
                    match (env_d, env_b) {
                        (Ok(env_d), Ok(env_b)) => {
                            let mut p = ControllerParams::new(
                                self.k_d[i],
                                self.k_beta[i],
                                self.d_des[i],
                                env_d,
                                env_b,
                            );
                            p.saturation = self.saturation;
                            p.soft_guard = self.soft_guard;
                            controllers.push(p);
                        }
                        (d, b) => {
                            if let Err(e) = d {
                                errors.errors.push(format!("vehicle {}: distance {e}", i + 1));
                            }
                            if let Err(e) = b {
                                errors.errors.push(format!("vehicle {}: bearing {e}", i + 1));
                            }
                        }
                    }
                }
                Err(e) => errors.errors.push(format!("vehicle {}: {e}", i + 1)),
            }
        }

        let follower_poses = match &self.initial {
            InitialLayout::Poses(poses) => poses.clone(),
            InitialLayout::Triples(triples) => {
                // Feasibility on the stated relative geometry, exactly.
                for (i, tr) in triples.iter().enumerate() {
                    if tr.d <= self.constraints.d_col {
                        errors.errors.push(format!(
                            "vehicle {}: initial distance {} at or inside the collision bound {}",
                            i + 1,
                            tr.d,
                            self.constraints.d_col
                        ));
                    }
                    if tr.d >= self.constraints.d_con {
                        errors.errors.push(format!(
                            "vehicle {}: initial distance {} at or beyond the connectivity bound {}",
                            i + 1,
                            tr.d,
                            self.constraints.d_con
                        ));
                    }
                    if tr.beta.abs() >= self.constraints.beta_con {
                        errors.errors.push(format!(
                            "vehicle {}: initial bearing {} at or beyond the bearing bound {}",
                            i + 1,
                            tr.beta,
                            self.constraints.beta_con
                        ));
                    }
                }
                poses_from_triples(self.leader_pose, triples)
            }
        };

        if !errors.errors.is_empty() {
            return Err(errors);
        }

        let scenario = Scenario {
            trajectory: self.trajectory.clone(),
            leader_pose: self.leader_pose,
            follower_poses,
            controllers,
            constraints: self.constraints,
            camera: self.camera,
            dt: self.dt,
            duration: self.duration,
            integrator: self.integrator,
            breach_policy: self.breach_policy,
            tail_fraction: self.tail_fraction,
        };
        if let Err(e) = scenario.validate() {
            errors
                .errors
                .extend(e.issues.iter().map(|i| i.to_string()));
            return Err(errors);
        }
        Ok(scenario)
    }

    /// Canonical TOML emission; parsing the result reproduces this config
    /// exactly.
    pub fn to_toml_string(&self) -> String {
        use std::fmt::Write;
        let q = |v: f64, d: Dimension| format!("\"{}\"", format_quantity(v, d));
        let mut s = String::new();
        let _ = writeln!(s, "schema_version = {}", self.schema_version);
        let _ = writeln!(s);
        let _ = writeln!(s, "[scenario]");
        let _ = writeln!(s, "n_followers = {}", self.n_followers);
        let _ = writeln!(s, "dt = {}", q(self.dt, Dimension::Time));
        let _ = writeln!(s, "duration = {}", q(self.duration, Dimension::Time));
        let _ = writeln!(
            s,
            "integrator = \"{}\"",
            match self.integrator {
                Integrator::Rk4 => "rk4",
                Integrator::Euler => "euler",
            }
        );
        let _ = writeln!(
            s,
            "breach_policy = \"{}\"",
            match self.breach_policy {
                BreachPolicy::Halt => "halt",
                BreachPolicy::RecordAndContinue => "record",
            }
        );
        let _ = writeln!(s, "tail_fraction = {}", fmt_f64(self.tail_fraction));
        let _ = writeln!(s);
        let _ = writeln!(s, "[leader]");
        match &self.trajectory {
            LeaderTrajectory::Constant { v, omega } => {
                let _ = writeln!(s, "kind = \"constant\"");
                let _ = writeln!(s, "v = {}", q(*v, Dimension::LinearVelocity));
                let _ = writeln!(s, "omega = {}", q(*omega, Dimension::AngularVelocity));
            }
            LeaderTrajectory::SinusoidalOmega { v, amplitude, frequency } => {
                let _ = writeln!(s, "kind = \"sinusoidal\"");
                let _ = writeln!(s, "v = {}", q(*v, Dimension::LinearVelocity));
                let _ = writeln!(s, "amplitude = {}", q(*amplitude, Dimension::AngularVelocity));
                let _ = writeln!(s, "frequency = {}", q(*frequency, Dimension::AngularVelocity));
            }
            LeaderTrajectory::Schedule { segments } => {
                let _ = writeln!(s, "kind = \"schedule\"");
                let entries: Vec<String> = segments
                    .iter()
                    .map(|seg| {
                        format!(
                            "{{ t = {}, v = {}, omega = {} }}",
                            q(seg.t_start, Dimension::Time),
                            q(seg.v, Dimension::LinearVelocity),
                            q(seg.omega, Dimension::AngularVelocity)
                        )
                    })
                    .collect();
                let _ = writeln!(s, "segments = [{}]", entries.join(", "));
            }
        }
        let _ = writeln!(s, "x = {}", q(self.leader_pose.x, Dimension::Length));
        let _ = writeln!(s, "y = {}", q(self.leader_pose.y, Dimension::Length));
        let _ = writeln!(s, "phi = {}", q(self.leader_pose.phi, Dimension::Angle));
        let _ = writeln!(s);
        let _ = writeln!(s, "[camera]");
        let _ = writeln!(s, "range = {}", q(self.camera.range, Dimension::Length));
        let _ = writeln!(s, "aov = {}", q(self.camera.aov, Dimension::Angle));
        let _ = writeln!(s);
        let _ = writeln!(s, "[constraints]");
        let _ = writeln!(s, "d_col = {}", q(self.constraints.d_col, Dimension::Length));
        let _ = writeln!(s, "d_con = {}", q(self.constraints.d_con, Dimension::Length));
        let _ = writeln!(s, "beta_con = {}", q(self.constraints.beta_con, Dimension::Angle));
        let _ = writeln!(s);
        let _ = writeln!(s, "[controller]");
        let _ = writeln!(s, "k_d = {}", fmt_f64_list(&self.k_d));
        let _ = writeln!(s, "k_beta = {}", fmt_f64_list(&self.k_beta));
        let d_des_entries: Vec<String> =
            self.d_des.iter().map(|&v| q(v, Dimension::Length)).collect();
        let _ = writeln!(s, "d_des = [{}]", d_des_entries.join(", "));
        if let Some(sat) = self.saturation {
            let _ = writeln!(
                s,
                "saturation = {{ v_max = {}, omega_max = {}, clamp = {} }}",
                q(sat.v_max, Dimension::LinearVelocity),
                q(sat.omega_max, Dimension::AngularVelocity),
                sat.clamp
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[envelope]");
        let _ = writeln!(s, "decay_d = {}", fmt_f64(self.decay_d));
        let _ = writeln!(s, "decay_beta = {}", fmt_f64(self.decay_beta));
        let _ = writeln!(s, "rho_inf_d = {}", q(self.rho_inf_d, Dimension::Length));
        let _ = writeln!(s, "rho_inf_beta = {}", q(self.rho_inf_beta, Dimension::Angle));
        if let Some(g) = self.soft_guard {
            let _ = writeln!(s, "soft_guard = {}", fmt_f64(g));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[initial]");
        match &self.initial {
            InitialLayout::Poses(poses) => {
                let entries: Vec<String> = poses
                    .iter()
                    .map(|p| {
                        format!(
                            "{{ x = {}, y = {}, phi = {} }}",
                            q(p.x, Dimension::Length),
                            q(p.y, Dimension::Length),
                            q(p.phi, Dimension::Angle)
                        )
                    })
                    .collect();
                let _ = writeln!(s, "poses = [\n  {}\n]", entries.join(",\n  "));
            }
            InitialLayout::Triples(triples) => {
                let entries: Vec<String> = triples
                    .iter()
                    .map(|t| {
                        format!(
                            "{{ d = {}, beta = {}, gamma = {} }}",
                            q(t.d, Dimension::Length),
                            q(t.beta, Dimension::Angle),
                            q(t.gamma, Dimension::Angle)
                        )
                    })
                    .collect();
                let _ = writeln!(s, "triples = [\n  {}\n]", entries.join(",\n  "));
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "[output]");
        let _ = writeln!(s, "trace = \"{}\"", self.output.trace);
        let _ = writeln!(s, "report = \"{}\"", self.output.report);
        let _ = writeln!(s, "plot_data = {}", self.output.plot_data);
        let _ = writeln!(s, "decimation = {}", self.output.decimation);
        s
    }
}

impl Walker {
    fn parse_pose_list(&mut self, v: &Value, path: &str) -> Option<Vec<Pose>> {
        let Value::Array(items) = v else {
            self.errors.push(format!("{path}poses: expected an array"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let sp = format!("{path}poses[{i}].");
            let Some(t) = item.as_table() else {
                self.errors.push(format!("{sp}: expected a table"));
                return None;
            };
            self.check_unknown(t, &sp, &["x", "y", "phi"]);
            let x = self.req_quantity(t, &sp, "x", Dimension::Length);
            let y = self.req_quantity(t, &sp, "y", Dimension::Length);
            let phi = self.req_quantity(t, &sp, "phi", Dimension::Angle);
            match (x, y, phi) {
                (Some(x), Some(y), Some(phi)) => out.push(Pose::new(x, y, phi)),
                _ => return None,
            }
        }
        Some(out)
    }

    fn parse_triple_list(&mut self, v: &Value, path: &str) -> Option<Vec<InitialTriple>> {
        let Value::Array(items) = v else {
            self.errors.push(format!("{path}triples: expected an array"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let sp = format!("{path}triples[{i}].");
            let Some(t) = item.as_table() else {
                self.errors.push(format!("{sp}: expected a table"));
                return None;
            };
            self.check_unknown(t, &sp, &["d", "beta", "gamma"]);
            let d = self.req_quantity(t, &sp, "d", Dimension::Length);
            let beta = self.req_quantity(t, &sp, "beta", Dimension::Angle);
            let gamma = self.req_quantity(t, &sp, "gamma", Dimension::Angle);
            match (d, beta, gamma) {
                (Some(d), Some(beta), Some(gamma)) => out.push(InitialTriple { d, beta, gamma }),
                _ => return None,
            }
        }
        Some(out)
    }
}

fn fmt_f64(v: f64) -> String {
    // Keep integral floats as TOML floats so they round-trip typed.
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn fmt_f64_list(vs: &[f64]) -> String {
    if vs.windows(2).all(|w| w[0] == w[1]) && !vs.is_empty() {
        fmt_f64(vs[0])
    } else {
        let entries: Vec<String> = vs.iter().map(|&v| fmt_f64(v)).collect();
        format!("[{}]", entries.join(", "))
    }
}
