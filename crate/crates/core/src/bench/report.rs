use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// How the blocking percentage is normalized, stated in every report.
pub const PERCENTAGE_NOTE: &str = "blocking_percentage = objective / expected number of users whose walk reaches the rumor set (sum over users of their hit fraction)";

/// One solver run at one sweep point and sampling seed. Floats carry six
/// significant digits, times are whole milliseconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub graph: String,
    pub algorithm: String,
    pub sweep_axis: String,
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub rumor_seed: u64,
    pub directed: bool,
    pub k: usize,
    pub rumor_size: usize,
    #[serde(rename = "T")]
    pub walk_length: usize,
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    pub rho: f64,
    pub certified_bounds: bool,
    pub node_cap: Option<usize>,
    pub time_cap_s: Option<f64>,
    pub node_count: usize,
    pub edge_count: usize,
    pub chosen_size: usize,
    pub objective: Option<f64>,
    pub blocking_percentage: Option<f64>,
    pub wall_time_ms: u64,
    pub peak_memory_kb: Option<u64>,
    pub expansions: usize,
    pub bound_calls: usize,
    pub gain_evaluations: u64,
    pub truncated: bool,
    /// `ok`, or `failed: <reason>` on the marker row closing a failed run.
    pub status: String,
    /// Chosen protectors as original node ids, in selection order.
    pub chosen: String,
}

impl ReportRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// `x` rounded to six significant digits.
pub fn round6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_memory_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ReportRow]) -> Result<()> {
    writeln!(out, "# {PERCENTAGE_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(csv_header())?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_header() -> Vec<String> {
    // Field names in declaration order, taken from a serialized dummy row.
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(ReportRow::default()).expect("in-memory write");
    let bytes = w.into_inner().expect("in-memory write");
    let text = String::from_utf8(bytes).expect("utf-8 header");
    text.lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_owned)
        .collect()
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    note: String,
    rows: Vec<ReportRow>,
}

pub fn write_json<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let report = JsonReport {
        note: PERCENTAGE_NOTE.into(),
        rows: rows.to_vec(),
    };
    serde_json::to_writer_pretty(out, &report)?;
    Ok(())
}

pub fn read_json<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let report: JsonReport = serde_json::from_reader(input)?;
    Ok(report.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round6(0.11920292202211755), 0.119203);
        assert_eq!(round6(123456789.0), 123457000.0);
        assert_eq!(round6(0.0), 0.0);
        assert_eq!(round6(-2.5e-8), -2.5e-8);
    }

    #[test]
    fn empty_csv_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().nth(1).unwrap();
        assert!(header.starts_with("graph,algorithm,sweep_axis"));
        assert!(header.ends_with("status,chosen"));
        assert!(read_csv(text.as_bytes()).unwrap().is_empty());
    }
}
