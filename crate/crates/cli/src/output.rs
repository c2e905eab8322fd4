//! CSV tables of sweep rows.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rdfilter::SweepRow;

pub const HEADER: [&str; 12] = [
    "N",
    "dt",
    "ratio",
    "shift_order",
    "kappa",
    "n_subdomains",
    "overlap",
    "err_l2",
    "err_linf",
    "stable",
    "steps",
    "wall_ms",
];

/// 17 significant digits, enough to read back the same `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format_real(r.dt),
            format_real(r.ratio),
            r.shift_order.to_string(),
            format_real(r.kappa),
            r.n_subdomains.to_string(),
            r.overlap.to_string(),
            format_real(r.err_l2),
            format_real(r.err_linf),
            r.stable.to_string(),
            r.steps.to_string(),
            format_real(r.wall_ms),
        ])?;
    }
    w.flush()
}

/// Writes to `path`, or stdout when `None`.
pub fn emit_csv(rows: &[SweepRow], path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => write_csv(rows, File::create(p)?),
        None => write_csv(rows, io::stdout().lock()),
    }
}

/// Reads a table written by [`write_csv`]. `saturated` is not stored and
/// comes back `false`.
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>, csv::Error> {
    fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, csv::Error> {
        rec[i].parse().map_err(|_| {
            csv::Error::from(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad value `{}` in column {}", &rec[i], HEADER[i]),
            ))
        })
    }
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(SweepRow {
            n: field(&rec, 0)?,
            dt: field(&rec, 1)?,
            ratio: field(&rec, 2)?,
            shift_order: field(&rec, 3)?,
            kappa: field(&rec, 4)?,
            n_subdomains: field(&rec, 5)?,
            overlap: field(&rec, 6)?,
            err_l2: field(&rec, 7)?,
            err_linf: field(&rec, 8)?,
            stable: field(&rec, 9)?,
            steps: field(&rec, 10)?,
            wall_ms: field(&rec, 11)?,
            saturated: false,
        });
    }
    Ok(rows)
}
