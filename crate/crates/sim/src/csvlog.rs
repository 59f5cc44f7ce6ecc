//! Per-step CSV logs: one header row, then one row per record, every value
//! written with 17 significant digits so a round trip is exact.
//!
//! The column layout is versioned by [`LOG_SCHEMA_VERSION`]; the version and
//! the attachment geometry travel in the JSON summary written next to the log.

use std::io::{Read, Write};
use std::path::Path;

use multilift_core::scenario::log::LOG_SCHEMA_VERSION;
use multilift_core::scenario::LogRecord;

use crate::SimError;

pub const SCHEMA_VERSION: u32 = LOG_SCHEMA_VERSION;

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a log for `n` cables. An empty log still gets its header.
pub fn write_log<W: Write>(w: W, n: usize, records: &[LogRecord]) -> Result<(), SimError> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(LogRecord::header(n))?;
    for r in records {
        if r.cables.len() != n {
            return Err(SimError::Log(format!("record at t = {} has {} cables, expected {n}", r.t, r.cables.len())));
        }
        out.write_record(r.values().into_iter().map(format_value))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_log_file(path: &Path, n: usize, records: &[LogRecord]) -> Result<(), SimError> {
    let f = std::fs::File::create(path)?;
    write_log(std::io::BufWriter::new(f), n, records)
}

/// Parse a log written by [`write_log`]. Returns the cable count and records.
pub fn read_log<R: Read>(r: R) -> Result<(usize, Vec<LogRecord>), SimError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    let n = LogRecord::cables_for_columns(header.len())
        .ok_or_else(|| SimError::Log(format!("{} columns do not match any cable count", header.len())))?;
    if header != LogRecord::header(n) {
        return Err(SimError::Log("unexpected column names".into()));
    }
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let values = row
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| SimError::Log(format!("bad value `{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(LogRecord::from_values(n, &values).map_err(|e| SimError::Log(e.to_string()))?);
    }
    Ok((n, records))
}

pub fn read_log_file(path: &Path) -> Result<(usize, Vec<LogRecord>), SimError> {
    read_log(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use multilift_core::scenario::CableLog;
    use multilift_core::Vec3;

    fn record(t: f64) -> LogRecord {
        let mut r = LogRecord { t, psi_r: 1.0 / 3.0, ..Default::default() };
        r.x0 = Vec3::new(t.sin(), -1e-300, 6.02e23);
        r.cables = vec![CableLog { psi_q: t / 7.0, ..Default::default() }; 2];
        r
    }

    #[test]
    fn round_trip_is_exact() {
        let recs: Vec<_> = (0..5).map(|k| record(0.1 * k as f64)).collect();
        let mut buf = Vec::new();
        write_log(&mut buf, 2, &recs).unwrap();
        let (n, back) = read_log(buf.as_slice()).unwrap();
        assert_eq!(n, 2);
        assert_eq!(back, recs);
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        write_log(&mut buf, 3, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("t,x0_x,"));
        assert_eq!(read_log(text.as_bytes()).unwrap(), (3, vec![]));
    }

    #[test]
    fn rejects_wrong_cable_count() {
        assert!(matches!(write_log(Vec::new(), 3, &[record(0.0)]), Err(SimError::Log(_))));
    }

    #[test]
    fn value_format() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(-2.0), "-2.0000000000000000e0");
    }
}
