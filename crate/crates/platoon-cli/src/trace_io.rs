//! Trace CSV format.
//!
//! Column order: `t`, then per vehicle i in {0 (leader), 1..N} the block
//! `x_i, y_i, phi_i, v_i, omega_i`, then per follower i in {1..N} the block
//! `d_i, beta_i, e_d_i, e_beta_i, xi_d_i, xi_beta_i, rho_d_i, rho_beta_i,
//! lb_d_i, ub_d_i, lb_beta_i, ub_beta_i, status_i`. Angles are radians.
//! Floats are written in shortest round-trip form, so re-reading a trace
//! reproduces the in-memory values bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use platoon_core::geometry::{ConstraintStatus, Measurement};
use platoon_core::kinematics::{ControlInput, Pose};
use platoon_core::simulator::{FollowerRecord, Trace, TraceRow};

use thiserror::Error;

/// Header row for a platoon with `n` followers.
pub fn header(n: usize) -> String {
    let mut h = String::from("t");
    for i in 0..=n {
        let _ = write!(h, ",x_{i},y_{i},phi_{i},v_{i},omega_{i}");
    }
    for i in 1..=n {
        let _ = write!(
            h,
            ",d_{i},beta_{i},e_d_{i},e_beta_{i},xi_d_{i},xi_beta_{i},rho_d_{i},rho_beta_{i},lb_d_{i},ub_d_{i},lb_beta_{i},ub_beta_{i},status_{i}"
        );
    }
    h
}

fn format_row(row: &TraceRow, out: &mut String) {
    let _ = write!(out, "{}", row.t);
    for (pose, u) in row.poses.iter().zip(row.controls.iter()) {
        let _ = write!(out, ",{},{},{},{},{}", pose.x, pose.y, pose.phi, u.v, u.omega);
    }
    for f in &row.followers {
        let _ = write!(
            out,
            ",{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.measurement.d,
            f.measurement.beta,
            f.e_d,
            f.e_beta,
            f.xi_d,
            f.xi_beta,
            f.rho_d,
            f.rho_beta,
            f.lb_d,
            f.ub_d,
            f.lb_beta,
            f.ub_beta,
            f.status.as_str()
        );
    }
}

/// Writes the trace, keeping every `decimation`-th row (and always row 0).
/// Returns the number of data rows written.
pub fn write_trace(trace: &Trace, path: &Path, decimation: usize) -> io::Result<usize> {
    let decimation = decimation.max(1);
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    writeln!(file, "{}", header(trace.n_followers))?;
    let mut written = 0;
    let mut line = String::new();
    for (k, row) in trace.rows.iter().enumerate() {
        if k % decimation != 0 {
            continue;
        }
        line.clear();
        format_row(row, &mut line);
        writeln!(file, "{line}")?;
        written += 1;
    }
    file.flush()?;
    Ok(written)
}

#[derive(Debug, Error)]
pub enum TraceReadError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
}

fn bad(line: usize, detail: impl Into<String>) -> TraceReadError {
    TraceReadError::Malformed {
        line,
        detail: detail.into(),
    }
}

/// Reads a trace written by [`write_trace`]. The follower count is
/// recovered from the header and `dt` from the first two timestamps
/// (zero for single-row traces).
pub fn read_trace(path: &Path) -> Result<Trace, TraceReadError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, head) = lines
        .next()
        .ok_or_else(|| bad(1, "empty file"))?;
    let cols: Vec<&str> = head.split(',').collect();
    // 1 + 5(n+1) + 13n columns
    let n = cols
        .len()
        .checked_sub(6)
        .filter(|rest| rest % 18 == 0)
        .map(|rest| rest / 18)
        .ok_or_else(|| bad(1, format!("unexpected column count {}", cols.len())))?;
    if head != header(n) {
        return Err(bad(1, "header does not match the trace schema"));
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(lineno, format!("{} fields, expected {}", fields.len(), cols.len())));
        }
        let mut pos = 0usize;
        let next_f64 = |pos: &mut usize, what: &str| -> Result<f64, TraceReadError> {
            let field = fields
                .get(*pos)
                .ok_or_else(|| bad(lineno, format!("missing {what}")))?;
            *pos += 1;
            field
                .parse()
                .map_err(|_| bad(lineno, format!("{what} is not a number")))
        };
        let t = next_f64(&mut pos, "t")?;
        let mut poses = Vec::with_capacity(n + 1);
        let mut controls = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let x = next_f64(&mut pos, "x")?;
            let y = next_f64(&mut pos, "y")?;
            let phi = next_f64(&mut pos, "phi")?;
            let v = next_f64(&mut pos, "v")?;
            let omega = next_f64(&mut pos, "omega")?;
            poses.push(Pose { x, y, phi });
            controls.push(ControlInput { v, omega });
        }
        let mut followers = Vec::with_capacity(n);
        for _ in 0..n {
            let d = next_f64(&mut pos, "d")?;
            let beta = next_f64(&mut pos, "beta")?;
            let e_d = next_f64(&mut pos, "e_d")?;
            let e_beta = next_f64(&mut pos, "e_beta")?;
            let xi_d = next_f64(&mut pos, "xi_d")?;
            let xi_beta = next_f64(&mut pos, "xi_beta")?;
            let rho_d = next_f64(&mut pos, "rho_d")?;
            let rho_beta = next_f64(&mut pos, "rho_beta")?;
            let lb_d = next_f64(&mut pos, "lb_d")?;
            let ub_d = next_f64(&mut pos, "ub_d")?;
            let lb_beta = next_f64(&mut pos, "lb_beta")?;
            let ub_beta = next_f64(&mut pos, "ub_beta")?;
            let status_text = fields
                .get(pos)
                .ok_or_else(|| bad(lineno, "missing status"))?;
            pos += 1;
            let status = ConstraintStatus::parse(status_text)
                .ok_or_else(|| bad(lineno, format!("unknown status \"{status_text}\"")))?;
            followers.push(FollowerRecord {
                measurement: Measurement { d, beta },
                e_d,
                e_beta,
                xi_d,
                xi_beta,
                rho_d,
                rho_beta,
                lb_d,
                ub_d,
                lb_beta,
                ub_beta,
                status,
            });
        }
        rows.push(TraceRow {
            t,
            poses,
            controls,
            followers,
        });
    }

    let dt = if rows.len() >= 2 {
        rows[1].t - rows[0].t
    } else {
        0.0
    };
    Ok(Trace {
        dt,
        n_followers: n,
        rows,
    })
}

/// Expected number of data rows for a run of `steps` steps at the given
/// decimation: every `decimation`-th row plus row 0.
pub fn decimated_rows(steps: usize, decimation: usize) -> usize {
    steps / decimation.max(1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_shape() {
        let h = header(2);
        assert_eq!(h.split(',').count(), 1 + 5 * 3 + 13 * 2);
        assert!(h.starts_with("t,x_0,y_0,phi_0,v_0,omega_0,x_1"));
        assert!(h.ends_with("status_2"));
    }

    #[test]
    fn decimated_row_counts() {
        assert_eq!(decimated_rows(60_000, 1), 60_001);
        assert_eq!(decimated_rows(60_000, 10), 6_001);
        assert_eq!(decimated_rows(55, 10), 6);
        assert_eq!(decimated_rows(0, 4), 1);
    }
}
