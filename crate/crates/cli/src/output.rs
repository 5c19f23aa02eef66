//! JSON and flat CSV rendering of command results.

use std::io::Write;

use serde::Serialize;

use crate::Format;

/// A command's result: the full record for JSON, flat rows for CSV, and
/// whether every check it ran passed.
pub struct Report {
    pub json: serde_json::Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub passed: bool,
}

impl Report {
    pub fn new(value: &impl Serialize, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Report {
            json: serde_json::to_value(value).expect("results serialize"),
            header,
            rows,
            passed: true,
        }
    }

    pub fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

pub trait Emit {
    fn emit(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()>;
}

impl Emit for Report {
    fn emit(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()
            }
        }
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_follow_the_header() {
        let r = Report::new(&serde_json::json!({"a": 1}), vec!["x", "y"], vec![vec![num(0.1), num(-2.0)]]);
        let mut out = Vec::new();
        r.emit(Format::Csv, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y\n0.1,-2.0\n");
        let mut out = Vec::new();
        r.emit(Format::Json, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\n  \"a\": 1\n}\n");
    }
}
