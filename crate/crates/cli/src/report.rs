use crate::config::{ExperimentConfig, Format};
use crate::CliError;
use serde::Serialize;
use serde_json::{Map, Value};
use std::io::Write;

/// Long-format results: one row per parameter point and checkpoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partial {
    pub reason: String,
    pub certified_through: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub precision_bits: u32,
    pub threads: usize,
    pub wall_time_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub summary: Map<String, Value>,
    pub table: Table,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial: Option<Partial>,
    pub provenance: Provenance,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.table.columns).map_err(CliError::io)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(cell)).map_err(CliError::io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 cells"))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, format: Format, out: Option<&std::path::Path>) -> Result<(), CliError> {
        let text = self.render(format)?;
        match out {
            Some(p) => std::fs::write(p, text).map_err(CliError::io),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(CliError::io),
        }
    }
}
