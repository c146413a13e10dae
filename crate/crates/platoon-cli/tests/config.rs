//! Configuration parsing and validation behavior: unit handling, full
//! error listing, serialize/parse round trips, and agreement between the
//! bundled files and the built-in presets.

use std::path::Path;

use approx::assert_relative_eq;
use platoon_cli::config::{Config, InitialLayout};
use platoon_cli::presets;
use platoon_core::kinematics::LeaderTrajectory;

fn repo_config(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    std::fs::read_to_string(path).expect("bundled config readable")
}

#[test]
fn bundled_reference_matches_preset() {
    let parsed = Config::parse(&repo_config("reference.toml")).expect("reference parses");
    assert_eq!(parsed, presets::reference());
    let scenario = parsed.to_scenario().expect("reference is a valid scenario");
    assert_eq!(scenario.n_followers(), 7);
    assert_eq!(scenario.steps(), 60_000);
    assert_relative_eq!(scenario.controllers[0].env_d.m_lower, 0.7125);
    assert_relative_eq!(scenario.controllers[0].env_d.m_upper, 1.25);
}

#[test]
fn bundled_fast_leader_matches_preset() {
    let parsed = Config::parse(&repo_config("fast_leader.toml")).expect("fast_leader parses");
    assert_eq!(parsed, presets::fast_leader());
    assert!(parsed.to_scenario().is_ok(), "feasible initial state; the breach happens mid-run");
    match parsed.trajectory {
        LeaderTrajectory::SinusoidalOmega { v, amplitude, frequency } => {
            assert_eq!((v, amplitude, frequency), (0.3, 0.2, 0.2));
        }
        other => panic!("unexpected trajectory {other:?}"),
    }
}

#[test]
fn empty_file_lists_every_missing_section() {
    let err = Config::parse("").unwrap_err();
    for needle in [
        "schema_version",
        "[scenario]",
        "[leader]",
        "[camera]",
        "[constraints]",
        "[controller]",
        "[envelope]",
        "[initial]",
    ] {
        assert!(
            err.errors.iter().any(|e| e.contains(needle)),
            "missing mention of {needle} in {err}"
        );
    }
}

#[test]
fn degree_and_radian_beta_con_agree() {
    let base = repo_config("reference.toml");
    let in_deg = Config::parse(&base).unwrap();
    let in_rad = Config::parse(&base.replace(
        "beta_con = \"45 deg\"",
        "beta_con = \"0.7853981633974483 rad\"",
    ))
    .unwrap();
    assert_eq!(in_deg.constraints.beta_con, in_rad.constraints.beta_con);
    // a seven-digit radian literal agrees to its own precision
    let coarse = Config::parse(&base.replace(
        "beta_con = \"45 deg\"",
        "beta_con = \"0.7853982 rad\"",
    ))
    .unwrap();
    assert_relative_eq!(
        in_deg.constraints.beta_con,
        coarse.constraints.beta_con,
        max_relative = 1e-7
    );
}

#[test]
fn unitless_angles_and_unknown_keys_are_rejected_together() {
    let broken = repo_config("reference.toml")
        .replace("beta_con = \"45 deg\"", "beta_con = 45.0")
        .replace("k_d = 0.005", "k_d = 0.005\nturbo = true");
    let err = Config::parse(&broken).unwrap_err();
    assert!(err.errors.iter().any(|e| e.contains("beta_con")), "{err}");
    assert!(
        err.errors.iter().any(|e| e.contains("controller.turbo")),
        "{err}"
    );
    assert!(err.errors.len() >= 2);
}

#[test]
fn serialize_parse_round_trip_is_identity() {
    for config in [presets::reference(), presets::fast_leader()] {
        let text = config.to_toml_string();
        let reparsed = Config::parse(&text).expect("canonical emission parses");
        assert_eq!(reparsed, config);
    }
    // schedule kind and per-vehicle arrays round-trip too
    let mut c = presets::reference();
    c.trajectory = LeaderTrajectory::Schedule {
        segments: vec![
            platoon_core::kinematics::ScheduleSegment { t_start: 0.0, v: 0.0, omega: 0.0 },
            platoon_core::kinematics::ScheduleSegment { t_start: 10.0, v: 0.04, omega: 0.01 },
        ],
    };
    c.k_d = vec![0.005, 0.006, 0.005, 0.004, 0.005, 0.0055, 0.005];
    c.soft_guard = Some(1e-9);
    let text = c.to_toml_string();
    assert_eq!(Config::parse(&text).unwrap(), c);
}

#[test]
fn pose_layout_parses() {
    let text = repo_config("reference.toml").replace(
        "triples = [\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n]",
        "poses = [\n  { x = \"-0.75 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-1.5 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-2.25 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-3 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-3.75 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-4.5 m\", y = \"0 m\", phi = \"0 rad\" },\n  { x = \"-5.25 m\", y = \"0 m\", phi = \"0 rad\" },\n]",
    );
    let config = Config::parse(&text).expect("pose layout parses");
    assert!(matches!(config.initial, InitialLayout::Poses(ref p) if p.len() == 7));
    let scenario = config.to_scenario().unwrap();
    assert_eq!(scenario.follower_poses[6].x, -5.25);
}

#[test]
fn follower_count_mismatch_is_an_error() {
    let text = repo_config("reference.toml").replace("n_followers = 7", "n_followers = 5");
    let err = Config::parse(&text).unwrap_err();
    assert!(err.errors.iter().any(|e| e.contains("7 entries")), "{err}");
}

#[test]
fn boundary_triples_are_rejected_exactly() {
    // d(0) = d_con, beta(0) = beta_con, d(0) = d_col: each rejected with
    // the offending vehicle named, gated on the stated values.
    let base = repo_config("reference.toml");
    for (replacement, needle) in [
        ("{ d = \"2 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },", "vehicle 1"),
        ("{ d = \"0.75 m\", beta = \"45 deg\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },", "vehicle 1"),
        ("{ d = \"0.0375 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },", "vehicle 1"),
    ] {
        let text = base.replace(
            "{ d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },\n  { d = \"0.75 m\", beta = \"0 rad\", gamma = \"0 rad\" },",
            replacement,
        );
        let config = Config::parse(&text).expect("parse is fine; validation rejects");
        let err = config.to_scenario().unwrap_err();
        assert!(
            err.errors.iter().any(|e| e.contains(needle)),
            "expected {needle} in {err}"
        );
    }
}

#[test]
fn incompatible_camera_is_rejected() {
    let text = repo_config("reference.toml").replace("range = \"2 m\"", "range = \"1.5 m\"");
    let config = Config::parse(&text).unwrap();
    let err = config.to_scenario().unwrap_err();
    assert!(
        err.errors.iter().any(|e| e.contains("exceeds camera range")),
        "{err}"
    );
}

#[test]
fn desired_distance_outside_constraints_is_rejected() {
    let text = repo_config("reference.toml").replace("d_des = \"0.75 m\"", "d_des = \"2.5 m\"");
    let config = Config::parse(&text).unwrap();
    let err = config.to_scenario().unwrap_err();
    assert!(!err.errors.is_empty());
}
