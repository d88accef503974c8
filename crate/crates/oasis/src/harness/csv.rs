//! CSV serialization of run records with an exact round trip: writing the
//! records parsed back from a file reproduces that file byte for byte.
//!
//! Floats are printed as `{:.16e}` — 17 significant decimal digits, enough
//! to recover every `f64` bit pattern — and missing values are the literal
//! `NaN`. Records are grouped by consecutive rows sharing a seed; the
//! `aborted` flag is `1` only on the final row of a run that stopped early.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{OasisError, Result};

use super::{LogRow, RunRecord};

/// Exact header line (no trailing newline).
pub const RUNS_CSV_HEADER: &str =
    "seed,iter,passes,f,gap,grad_norm_sq,eta,theta,dhat_min,dhat_max,drift,psi,accuracy,aborted";

fn fmt_float(buf: &mut String, x: f64) {
    if x.is_nan() {
        buf.push_str("NaN");
    } else {
        write!(buf, "{x:.16e}").expect("writing to a String cannot fail");
    }
}

/// Render the records to CSV text.
pub fn write_runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::new();
    out.push_str(RUNS_CSV_HEADER);
    out.push('\n');
    for rec in records {
        for (i, row) in rec.rows.iter().enumerate() {
            let aborted_here = rec.aborted && i + 1 == rec.rows.len();
            write!(out, "{},{},", rec.seed, row.iter).expect("infallible");
            for (j, value) in [
                row.passes,
                row.f,
                row.gap,
                row.grad_norm_sq,
                row.eta,
                row.theta,
                row.dhat_min,
                row.dhat_max,
                row.drift,
                row.psi,
                row.accuracy,
            ]
            .into_iter()
            .enumerate()
            {
                if j > 0 {
                    out.push(',');
                }
                fmt_float(&mut out, value);
            }
            out.push(',');
            out.push(if aborted_here { '1' } else { '0' });
            out.push('\n');
        }
    }
    out
}

/// Write the records to a file.
pub fn write_runs_csv_file(records: &[RunRecord], path: &Path) -> Result<()> {
    std::fs::write(path, write_runs_csv(records))?;
    Ok(())
}

fn parse_float(token: &str, line: usize) -> Result<f64> {
    if token == "NaN" {
        return Ok(f64::NAN);
    }
    token.parse::<f64>().map_err(|_| OasisError::Parse {
        line,
        message: format!("invalid float `{token}`"),
    })
}

/// Parse CSV text produced by [`write_runs_csv`]. The header must match
/// exactly; runs are split where the seed column changes.
pub fn read_runs_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == RUNS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(OasisError::Parse {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(OasisError::Parse {
                line: 1,
                message: "empty input".into(),
            })
        }
    }

    let mut records: Vec<RunRecord> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 14 {
            return Err(OasisError::Parse {
                line,
                message: format!("expected 14 fields, found {}", fields.len()),
            });
        }
        let seed: u64 = fields[0].parse().map_err(|_| OasisError::Parse {
            line,
            message: format!("invalid seed `{}`", fields[0]),
        })?;
        let iter: usize = fields[1].parse().map_err(|_| OasisError::Parse {
            line,
            message: format!("invalid iteration `{}`", fields[1]),
        })?;
        let mut floats = [0.0_f64; 11];
        for (slot, token) in floats.iter_mut().zip(&fields[2..13]) {
            *slot = parse_float(token, line)?;
        }
        let aborted = match fields[13] {
            "0" => false,
            "1" => true,
            other => {
                return Err(OasisError::Parse {
                    line,
                    message: format!("aborted flag must be 0 or 1, found `{other}`"),
                })
            }
        };
        let row = LogRow {
            iter,
            passes: floats[0],
            f: floats[1],
            gap: floats[2],
            grad_norm_sq: floats[3],
            eta: floats[4],
            theta: floats[5],
            dhat_min: floats[6],
            dhat_max: floats[7],
            drift: floats[8],
            psi: floats[9],
            accuracy: floats[10],
        };
        // A record continues while the seed matches, the run hasn't ended in
        // an abort, and the iteration counter keeps advancing (it restarts
        // at 0 for each run).
        match records.last_mut() {
            Some(rec)
                if rec.seed == seed
                    && !rec.aborted
                    && rec.rows.last().is_some_and(|last| last.iter < iter) =>
            {
                rec.rows.push(row);
                rec.aborted = aborted;
            }
            _ => records.push(RunRecord {
                seed,
                rows: vec![row],
                aborted,
            }),
        }
    }
    Ok(records)
}

/// Read records from a file.
pub fn read_runs_csv_file(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    read_runs_csv(&text)
}

fn float_eq(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

/// Bitwise equality of record sets, treating all NaNs as equal.
pub fn records_equal(a: &[RunRecord], b: &[RunRecord]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.seed == y.seed
                && x.aborted == y.aborted
                && x.rows.len() == y.rows.len()
                && x.rows.iter().zip(&y.rows).all(|(r, s)| {
                    r.iter == s.iter
                        && float_eq(r.passes, s.passes)
                        && float_eq(r.f, s.f)
                        && float_eq(r.gap, s.gap)
                        && float_eq(r.grad_norm_sq, s.grad_norm_sq)
                        && float_eq(r.eta, s.eta)
                        && float_eq(r.theta, s.theta)
                        && float_eq(r.dhat_min, s.dhat_min)
                        && float_eq(r.dhat_max, s.dhat_max)
                        && float_eq(r.drift, s.drift)
                        && float_eq(r.psi, s.psi)
                        && float_eq(r.accuracy, s.accuracy)
                })
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<RunRecord> {
        let row = |iter: usize, f: f64, eta: f64| LogRow {
            iter,
            passes: iter as f64 * 2.0,
            f,
            gap: f + 0.7,
            grad_norm_sq: f * f,
            eta,
            theta: if iter >= 2 { eta / 2.0 } else { f64::NAN },
            dhat_min: 1e-5,
            dhat_max: 8.0,
            drift: if iter >= 2 { 1e-3 } else { f64::NAN },
            psi: f64::NAN,
            accuracy: f64::NAN,
        };
        vec![
            RunRecord {
                seed: 1,
                rows: vec![row(0, 0.30000000000000004, f64::NAN), row(1, 0.1, 0.5)],
                aborted: false,
            },
            RunRecord {
                seed: 2,
                rows: vec![row(0, 2.5e17, f64::NAN), row(1, 1e300, 1e-300)],
                aborted: true,
            },
        ]
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let records = sample_records();
        let text = write_runs_csv(&records);
        let parsed = read_runs_csv(&text).unwrap();
        assert!(records_equal(&records, &parsed));
        assert_eq!(write_runs_csv(&parsed), text);
    }

    #[test]
    fn header_and_flags_are_laid_out_as_documented() {
        let records = sample_records();
        let text = write_runs_csv(&records);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RUNS_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1,0,"));
        assert!(lines[1].ends_with(",0"));
        assert!(lines[3].ends_with(",0"), "abort flag only on the last row");
        assert!(lines[4].ends_with(",1"));
        assert!(lines[1].contains("NaN"));
    }

    #[test]
    fn seventeen_digits_recover_every_bit() {
        for x in [
            0.1,
            0.30000000000000004,
            1e-300,
            2.5e17,
            f64::MIN_POSITIVE,
            1.0 + f64::EPSILON,
            -9.87654321e-8,
        ] {
            let printed = format!("{x:.16e}");
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed}");
        }
    }

    #[test]
    fn corrupt_inputs_report_the_offending_line() {
        let good = write_runs_csv(&sample_records());
        let mut broken = good.clone();
        broken = broken.replacen(RUNS_CSV_HEADER, "seed,iter", 1);
        assert!(matches!(
            read_runs_csv(&broken),
            Err(OasisError::Parse { line: 1, .. })
        ));

        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        lines[2] = "1,1,notafloat,0,0,0,0,0,0,0,0,0,0,0".into();
        let err = read_runs_csv(&lines.join("\n")).unwrap_err();
        match err {
            OasisError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("notafloat"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        lines[2] = "1,1,0,0,0,0,0,0,0,0,0,0,0,2".into();
        assert!(read_runs_csv(&lines.join("\n")).is_err());
        lines[2] = "1,1,0,0".into();
        assert!(read_runs_csv(&lines.join("\n")).is_err());
    }

    #[test]
    fn file_round_trip_matches_in_memory_form() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let records = sample_records();
        write_runs_csv_file(&records, &path).unwrap();
        let parsed = read_runs_csv_file(&path).unwrap();
        assert!(records_equal(&records, &parsed));
    }

    #[test]
    fn repeated_seeds_still_split_into_separate_records() {
        // Two runs under the same seed: the iteration counter restarting at
        // 0 marks the boundary.
        let mut records = sample_records();
        records[1].seed = 1;
        let text = write_runs_csv(&records);
        let parsed = read_runs_csv(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert!(!parsed[0].aborted);
        assert!(parsed[1].aborted);
        assert!(records_equal(&records, &parsed));
    }
}
