use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SweepResult, SweepRow};
use crate::error::{Error, Result};

const HEADER: [&str; 7] = [
    "snr_db",
    "detector",
    "decisions",
    "errors",
    "ser",
    "avg_undertrained",
    "wall_time_s",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header and one line per row. Floats use shortest round-trip
/// decimal notation; absent values are empty fields.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.snr_db.to_string(),
            r.detector.clone(),
            r.decisions.to_string(),
            r.errors.to_string(),
            opt(r.ser),
            opt(r.avg_undertrained),
            format!("{:.6}", r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(result, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn parse_csv(path: &Path) -> Result<SweepResult> {
    let err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(HEADER) {
        return Err(err(format!("unexpected header {:?}", reader.headers()?)));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse().map_err(|e| err(format!("bad {what} {s:?}: {e}")))
    };
    let int = |s: &str, what: &str| -> Result<u64> {
        s.parse().map_err(|e| err(format!("bad {what} {s:?}: {e}")))
    };
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let optional = |i: usize, what: &str| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                s => num(s, what).map(Some),
            }
        };
        rows.push(SweepRow {
            snr_db: num(&rec[0], "snr_db")?,
            detector: rec[1].to_string(),
            decisions: int(&rec[2], "decisions")?,
            errors: int(&rec[3], "errors")?,
            ser: optional(4, "ser")?,
            avg_undertrained: optional(5, "avg_undertrained")?,
            wall_time_s: num(&rec[6], "wall_time_s")?,
        });
    }
    Ok(SweepResult { rows })
}
