use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use platoon_cli::config::{Config, ConfigErrors};
use platoon_cli::{plotdata, presets, report::ReportJson, sweep, trace_io, verify};
use platoon_core::simulator::{run, BreachPolicy, Scenario};

#[derive(Parser)]
#[command(
    name = "platoon",
    version,
    about = "Deterministic 2-D unicycle platoon simulator with prescribed-performance monitors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario; write the trace CSV, report JSON, and optional
    /// plot-data CSVs
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for output files (created if missing)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Keep every Nth trace row (row 0 always kept); overrides the config
        #[arg(long)]
        decimation: Option<usize>,
        /// Override the configured breach policy
        #[arg(long, value_parser = ["halt", "record"])]
        breach_policy: Option<String>,
        /// Reserved: stamped into the report; the pipeline is noise-free
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a configuration without running it
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the self-verification oracle suite
    Verify {
        /// Scenario for the run-based checks (defaults to the built-in
        /// reference scenario)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also print finite-difference audit residuals across step sizes
        #[arg(long)]
        dt_sweep: bool,
    },
    /// Run one scenario per axis value and aggregate the reports
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Numeric configuration path, e.g. controller.k_d or scenario.dt
        #[arg(long)]
        axis: String,
        /// Comma-separated list of values
        #[arg(long)]
        values: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

fn load_config(path: &Path) -> Result<Config, ConfigErrors> {
    let text = fs::read_to_string(path).map_err(|e| ConfigErrors {
        errors: vec![format!("cannot read {}: {e}", path.display())],
    })?;
    Config::parse(&text)
}

fn print_config_errors(e: &ConfigErrors) {
    eprint!("{e}");
}

fn cmd_run(
    config_path: &Path,
    out_dir: &Path,
    decimation: Option<usize>,
    breach_policy: Option<String>,
    seed: Option<u64>,
) -> u8 {
    let mut config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            print_config_errors(&e);
            return EXIT_CONFIG;
        }
    };
    if let Some(d) = decimation {
        if d == 0 {
            eprintln!("--decimation must be >= 1");
            return EXIT_CONFIG;
        }
        config.output.decimation = d;
    }
    match breach_policy.as_deref() {
        Some("halt") => config.breach_policy = BreachPolicy::Halt,
        Some("record") => config.breach_policy = BreachPolicy::RecordAndContinue,
        Some(_) | None => {}
    }
    let scenario = match config.to_scenario() {
        Ok(s) => s,
        Err(e) => {
            print_config_errors(&e);
            return EXIT_CONFIG;
        }
    };

    let start = Instant::now();
    let mut outcome = match run(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprint!("{e}");
            return EXIT_CONFIG;
        }
    };
    outcome.report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    outcome.report.seed = seed;

    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return EXIT_CONFIG;
    }
    let trace_path = out_dir.join(&config.output.trace);
    let report_path = out_dir.join(&config.output.report);
    let rows = match trace_io::write_trace(&outcome.trace, &trace_path, config.output.decimation) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("cannot write {}: {e}", trace_path.display());
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = ReportJson::from_report(&outcome.report).write(&report_path) {
        eprintln!("cannot write {}: {e}", report_path.display());
        return EXIT_CONFIG;
    }
    if config.output.plot_data {
        if let Err(e) =
            plotdata::write_plot_data(&outcome.trace, &scenario.constraints, out_dir, config.output.decimation)
        {
            eprintln!("cannot write plot data: {e}");
            return EXIT_CONFIG;
        }
    }

    let r = &outcome.report;
    println!(
        "run: {} followers, {} of {} steps, {} trace rows written",
        scenario.n_followers(),
        r.rows_recorded.saturating_sub(1),
        r.steps_planned,
        rows
    );
    println!(
        "monitors: envelope violations {} (distance) / {} (bearing), flags {} (collision) / {} (connectivity)",
        r.envelope_violations_distance.count,
        r.envelope_violations_bearing.count,
        r.collision_flags.count,
        r.connectivity_flags.count
    );
    if let Some(h) = &r.halt {
        println!("{h}");
    }
    println!(
        "peaks: |v| {:.6} m/s, |omega| {:.6} rad/s, |beta| {:.6} rad; wall clock {:.3} s",
        r.max_abs_v,
        r.max_abs_omega,
        r.max_abs_bearing,
        r.wall_clock_seconds.unwrap_or(0.0)
    );
    println!(
        "wrote {} and {}{}",
        trace_path.display(),
        report_path.display(),
        if config.output.plot_data {
            format!(" and plot data in {}", out_dir.display())
        } else {
            String::new()
        }
    );

    if r.is_clean() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_check(config_path: &Path) -> u8 {
    match load_config(config_path).and_then(|c| c.to_scenario().map(|s| (c, s))) {
        Ok((config, scenario)) => {
            println!(
                "configuration OK: {} followers, dt {} s, {} steps, integrator {:?}, breach policy {:?}",
                scenario.n_followers(),
                scenario.dt,
                scenario.steps(),
                scenario.integrator,
                scenario.breach_policy
            );
            println!(
                "outputs: trace \"{}\", report \"{}\", plot data {}",
                config.output.trace, config.output.report, config.output.plot_data
            );
            EXIT_OK
        }
        Err(e) => {
            print_config_errors(&e);
            EXIT_CONFIG
        }
    }
}

fn cmd_verify(config_path: Option<&Path>, dt_sweep: bool) -> u8 {
    let scenario: Scenario = match config_path {
        Some(path) => match load_config(path).and_then(|c| c.to_scenario()) {
            Ok(s) => s,
            Err(e) => {
                print_config_errors(&e);
                return EXIT_CONFIG;
            }
        },
        None => presets::reference()
            .to_scenario()
            .expect("built-in reference scenario is valid"),
    };

    let checks = match verify::standard_checks(&scenario) {
        Ok(checks) => checks,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    for check in &checks {
        println!("{check}");
    }
    if dt_sweep {
        match verify::dt_sweep(&scenario, &[4e-3, 2e-3, 1e-3]) {
            Ok(rows) => {
                println!("finite-difference audit residuals by step size:");
                println!("{:>10}  {:>14}  {:>14}", "dt (s)", "distance", "bearing");
                for (dt, d, b) in rows {
                    println!("{dt:>10}  {d:>14.6e}  {b:>14.6e}");
                }
            }
            Err(e) => {
                eprintln!("{e}");
                return EXIT_CONFIG;
            }
        }
    }
    if checks.iter().all(|c| c.passed) {
        println!("all checks passed");
        EXIT_OK
    } else {
        println!("{} check(s) failed", checks.iter().filter(|c| !c.passed).count());
        EXIT_VIOLATION
    }
}

fn cmd_sweep(
    config_path: &Path,
    axis: &str,
    values_text: &str,
    out_dir: &Path,
    seed: Option<u64>,
) -> u8 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            print_config_errors(&e);
            return EXIT_CONFIG;
        }
    };
    let mut values = Vec::new();
    for part in values_text.split(',').filter(|p| !p.trim().is_empty()) {
        match part.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                eprintln!("sweep: \"{}\" is not a finite number", part.trim());
                return EXIT_CONFIG;
            }
        }
    }
    let report = match sweep::run_sweep(&config, axis, &values, seed) {
        Ok(r) => r,
        Err(e) => {
            print_config_errors(&e);
            return EXIT_CONFIG;
        }
    };

    println!(
        "{:>14}  {:>9}  {:>6}  {:>6}  {:>12}  {:>12}  {:>12}",
        "value", "completed", "env_d", "env_b", "max|v|", "max|omega|", "tail|e_d|"
    );
    for row in &report.rows {
        println!(
            "{:>14}  {:>9}  {:>6}  {:>6}  {:>12.6e}  {:>12.6e}  {:>12}",
            row.value,
            row.report.completed,
            row.report.envelope_violations_distance.count,
            row.report.envelope_violations_bearing.count,
            row.report.max_abs_v,
            row.report.max_abs_omega,
            row.report
                .tail_max_abs_e_d
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_else(|| "-".into()),
        );
    }

    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return EXIT_CONFIG;
    }
    let path = out_dir.join("sweep.json");
    let mut text = serde_json::to_string_pretty(&report).expect("sweep serialization");
    text.push('\n');
    if let Err(e) = fs::write(&path, text) {
        eprintln!("cannot write {}: {e}", path.display());
        return EXIT_CONFIG;
    }
    println!("wrote {}", path.display());

    if report.all_clean() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            out_dir,
            decimation,
            breach_policy,
            seed,
        } => cmd_run(&config, &out_dir, decimation, breach_policy, seed),
        Command::Check { config } => cmd_check(&config),
        Command::Verify { config, dt_sweep } => cmd_verify(config.as_deref(), dt_sweep),
        Command::Sweep {
            config,
            axis,
            values,
            out_dir,
            seed,
        } => cmd_sweep(&config, &axis, &values, &out_dir, seed),
    };
    ExitCode::from(code)
}
