//! Configuration ingestion, trace/report/plot-data file formats, parameter
//! sweeps, and the self-verification suite for the platoon simulator.
//! The `platoon` binary in this crate is the command-line front end; the
//! simulation itself lives in `platoon-core`.

pub mod config;
pub mod plotdata;
pub mod presets;
pub mod report;
pub mod sweep;
pub mod trace_io;
pub mod units;
pub mod verify;
