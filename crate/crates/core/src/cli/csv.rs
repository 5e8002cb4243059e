//! Trajectory CSV output and its exact inverse.
//!
//! Numbers are written with 17 significant digits, which round-trips any
//! f64 bit-exactly, so a parsed file compares bitwise equal to the run
//! that produced it.

use super::CliError;
use crate::sim::{Record, Trajectory};
use std::fmt::Write as _;
use std::path::Path;

pub const CSV_HEADER: &str = "t,x1,x2,x3,x4,u,ym,e,theta_f_norm,theta_g_norm,clamp";

/// The per-sample columns; the schedule multipliers are run metadata and
/// stay out of the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub x: [f64; 4],
    pub u: f64,
    pub ym: f64,
    pub e: f64,
    pub theta_f_norm: f64,
    pub theta_g_norm: f64,
    pub clamped: bool,
}

impl From<&Record> for CsvRow {
    fn from(r: &Record) -> Self {
        Self {
            t: r.t,
            x: r.x,
            u: r.u,
            ym: r.ym,
            e: r.e,
            theta_f_norm: r.theta_f_norm,
            theta_g_norm: r.theta_g_norm,
            clamped: r.clamped,
        }
    }
}

pub fn format_csv(traj: &Trajectory) -> Result<String, CliError> {
    if traj.is_empty() {
        return Err(CliError::Scenario("cannot emit an empty trajectory".into()));
    }
    let mut out = String::with_capacity(32 + traj.len() * 240);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &traj.records {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.t,
            r.x[0],
            r.x[1],
            r.x[2],
            r.x[3],
            r.u,
            r.ym,
            r.e,
            r.theta_f_norm,
            r.theta_g_norm,
            u8::from(r.clamped),
        );
    }
    Ok(out)
}

pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let text = format_csv(traj)?;
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, CliError> {
    let bad = |line: usize, msg: String| CliError::Config {
        line: Some(line),
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((_, h)) => return Err(bad(1, format!("unexpected header `{h}`"))),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(bad(idx + 1, format!("{} fields, expected 11", fields.len())));
        }
        let mut nums = [0.0f64; 10];
        for (slot, field) in nums.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| bad(idx + 1, format!("`{field}` is not a number")))?;
        }
        let clamped = match fields[10] {
            "0" => false,
            "1" => true,
            v => return Err(bad(idx + 1, format!("clamp `{v}` is not 0/1"))),
        };
        rows.push(CsvRow {
            t: nums[0],
            x: [nums[1], nums[2], nums[3], nums[4]],
            u: nums[5],
            ym: nums[6],
            e: nums[7],
            theta_f_norm: nums[8],
            theta_g_norm: nums[9],
            clamped,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, v: f64) -> Record {
        Record {
            t,
            x: [v, -v * 3.0, v * v, 1.0 / (1.0 + v * v)],
            u: v.sin() * 1e3,
            ym: 0.2 * t.sin(),
            e: 0.2 * t.sin() - v * v,
            theta_f_norm: v.abs(),
            theta_g_norm: 138.0 + v,
            clamped: t > 1.0,
            multipliers: vec![1.0, 1.3],
        }
    }

    #[test]
    fn one_sample_gives_header_plus_row() {
        let traj = Trajectory {
            records: vec![record(0.0, 0.5)],
            warnings: vec![],
        };
        let text = format_csv(&traj).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 11);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        // Exercise awkward magnitudes: subnormal, huge, negative zero.
        let mut traj = Trajectory::default();
        for (i, v) in [0.1, -1e-308, 9.9e307, -0.0, 1.0 / 3.0, f64::MIN_POSITIVE]
            .into_iter()
            .enumerate()
        {
            traj.records.push(record(i as f64 * 1e-3, v));
        }
        let text = format_csv(&traj).unwrap();
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), traj.len());
        for (row, rec) in rows.iter().zip(&traj.records) {
            assert_eq!(row.t.to_bits(), rec.t.to_bits());
            for i in 0..4 {
                assert_eq!(row.x[i].to_bits(), rec.x[i].to_bits());
            }
            assert_eq!(row.u.to_bits(), rec.u.to_bits());
            assert_eq!(row.ym.to_bits(), rec.ym.to_bits());
            assert_eq!(row.e.to_bits(), rec.e.to_bits());
            assert_eq!(row.theta_f_norm.to_bits(), rec.theta_f_norm.to_bits());
            assert_eq!(row.theta_g_norm.to_bits(), rec.theta_g_norm.to_bits());
            assert_eq!(row.clamped, rec.clamped);
        }
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        assert!(format_csv(&Trajectory::default()).is_err());
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(parse_csv("nope\n").is_err());
        let short = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(parse_csv(&short).is_err());
        let bad_clamp = format!("{CSV_HEADER}\n0,0,0,0,0,0,0,0,0,0,x\n");
        assert!(parse_csv(&bad_clamp).is_err());
    }
}
