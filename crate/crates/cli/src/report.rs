//! Report assembly. JSON reports carry a schema version and the full run
//! configuration; CSV tables start with a versioned comment line.

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const REPORT_SCHEMA: &str = "ultradiff.report/1";
pub const CSV_VERSION: &str = "ultradiff.csv/1";

/// A CSV table with fixed columns; cells are preformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = format!("# {CSV_VERSION} table={}\n", self.name);
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Shortest round-trip float formatting, `inf`/`-inf`/`nan` spelled out.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    /// Overall status string (`HOLDS_UP_TO`, `REFUTED`, `ESTIMATE`, `PASS`, `FAIL`).
    pub status: String,
    pub exit_code: i32,
    pub body: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let v = json!({
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "config": self.config,
            "status": self.status,
            "exit_code": self.exit_code,
            "result": self.body,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    /// The table when present, else a one-row summary.
    pub fn to_csv(&self) -> Result<String, CliError> {
        match &self.table {
            Some(t) => t.to_csv(),
            None => {
                let mut t = Table::new("summary", &["command", "status", "exit_code"]);
                t.push(vec![self.command.clone(), self.status.clone(), self.exit_code.to_string()]);
                t.to_csv()
            }
        }
    }

    pub fn render(&self) -> Result<String, CliError> {
        match self.config.format {
            crate::config::Format::Json => Ok(self.to_json()),
            crate::config::Format::Csv => self.to_csv(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_version_header() {
        let mut t = Table::new("demo", &["k", "value"]);
        t.push(vec!["1".into(), cell(0.5)]);
        t.push(vec!["2".into(), cell(f64::NEG_INFINITY)]);
        let s = t.to_csv().unwrap();
        assert_eq!(s, "# ultradiff.csv/1 table=demo\nk,value\n1,0.5\n2,-inf\n");
    }

    #[test]
    fn json_embeds_config() {
        let r = Report {
            command: "x".into(),
            config: RunConfig::default(),
            status: "PASS".into(),
            exit_code: 0,
            body: json!({}),
            table: None,
        };
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert_eq!(v["config"]["truncation"], 4096);
    }
}
