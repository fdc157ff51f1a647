use std::fs;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// Rationals are written as exact `p/q` strings.
pub fn serialize_rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A per-row failure kept in the report instead of aborting the run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowFailure {
    pub n: Option<u64>,
    pub error: String,
    pub exit_code: i32,
}

impl RowFailure {
    pub fn new(n: Option<u64>, e: &Error) -> Self {
        let e = match e {
            Error::AtMember { source, .. } => source.as_ref(),
            other => other,
        };
        Self { n, error: e.to_string(), exit_code: e.exit_code() }
    }
}

/// Tabular output plus a JSON mirror. Cells are preformatted strings so both
/// files are byte-for-byte reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub module: &'static str,
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub details: Value,
    pub failures: Vec<RowFailure>,
}

impl Report {
    pub fn new(module: &'static str, command: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self {
            module,
            command: command.into(),
            config_hash: String::new(),
            config: Value::Null,
            columns,
            rows: Vec::new(),
            details: Value::Null,
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn fail(&mut self, n: Option<u64>, e: &Error) {
        self.failures.push(RowFailure::new(n, e));
    }

    /// Highest exit code among recorded failures, 0 if none.
    pub fn exit_code(&self) -> i32 {
        self.failures.iter().map(|f| f.exit_code).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(row.iter().map(|v| json!(v))).collect::<Map<_, _>>()))
            .collect();
        json!({
            "module": self.module,
            "command": self.command,
            "version": VERSION,
            "config_hash": self.config_hash,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
            "details": self.details,
            "failures": self.failures,
        })
    }

    /// Writes `report.csv` and `report.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.csv"), self.to_csv()?).map_err(io)?;
        let mut text = serde_json::to_string_pretty(&self.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(dir.join("report.json"), text).map_err(io)?;
        Ok(())
    }
}

/// Shortest round-trip decimal; empty for absent values.
pub fn cell(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_mirror() {
        let mut r = Report::new("euclid", "euclid scan", vec!["n", "value"]);
        r.push(vec!["1".into(), "0.5".into()]);
        r.push(vec!["2".into(), "a,b".into()]);
        assert_eq!(r.to_csv().unwrap(), "n,value\n1,0.5\n2,\"a,b\"\n");
        let j = r.to_json();
        assert_eq!(j["rows"][1]["value"], "a,b");
        assert_eq!(j["version"], VERSION);
        assert_eq!(r.exit_code(), 0);
        r.fail(Some(3), &Error::Budget { what: "point", needed: 10, limit: 5 });
        assert_eq!(r.exit_code(), 3);
        assert_eq!(cell(None), "");
    }
}
