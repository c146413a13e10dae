//! Long-form plot-data CSVs: one row per (time, vehicle), ready for any
//! plotting tool. Three files mirror the usual platoon figures — error
//! curves with their envelope bounds for both channels, and raw
//! inter-vehicle distances with the constraint lines.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use platoon_core::geometry::Constraints;
use platoon_core::simulator::Trace;

pub const DISTANCE_ERRORS_FILE: &str = "plot_distance_errors.csv";
pub const BEARING_ERRORS_FILE: &str = "plot_bearing_errors.csv";
pub const DISTANCES_FILE: &str = "plot_distances.csv";

pub fn write_plot_data(
    trace: &Trace,
    constraints: &Constraints,
    dir: &Path,
    decimation: usize,
) -> io::Result<()> {
    let decimation = decimation.max(1);

    let mut de = io::BufWriter::new(fs::File::create(dir.join(DISTANCE_ERRORS_FILE))?);
    writeln!(de, "t,vehicle,e_d,lower,upper")?;
    let mut be = io::BufWriter::new(fs::File::create(dir.join(BEARING_ERRORS_FILE))?);
    writeln!(be, "t,vehicle,e_beta,lower,upper")?;
    let mut dd = io::BufWriter::new(fs::File::create(dir.join(DISTANCES_FILE))?);
    writeln!(dd, "t,vehicle,d,d_col,d_con")?;

    for (k, row) in trace.rows.iter().enumerate() {
        if k % decimation != 0 {
            continue;
        }
        for (i, f) in row.followers.iter().enumerate() {
            let vehicle = i + 1;
            writeln!(de, "{},{vehicle},{},{},{}", row.t, f.e_d, f.lb_d, f.ub_d)?;
            writeln!(be, "{},{vehicle},{},{},{}", row.t, f.e_beta, f.lb_beta, f.ub_beta)?;
            writeln!(
                dd,
                "{},{vehicle},{},{},{}",
                row.t, f.measurement.d, constraints.d_col, constraints.d_con
            )?;
        }
    }
    de.flush()?;
    be.flush()?;
    dd.flush()
}
