use std::io::Write;

use anyhow::Result;
use serde_json::{json, Map, Value};

use crate::config::Config;

/// One command's output: a table, scalar diagnostics and the verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
    /// Monitors above their empirical ceiling.
    pub warnings: Vec<String>,
    /// Violated identities or unconditional inequalities.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Report {
            command: command.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
            warnings: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn monitor(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.warnings.push(what());
        }
    }
}

pub fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "nan".to_string(),
        other => other.to_string(),
    }
}

/// Header plus rows, with the seed appended to every row.
pub fn write_csv(report: &Report, seed: u64, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = report.columns.clone();
    header.push("seed");
    w.write_record(&header)?;
    let seed = seed.to_string();
    for row in &report.rows {
        let mut rec: Vec<String> = row.iter().map(cell).collect();
        rec.push(seed.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(report: &Report, seed: u64, config: &Config) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            Value::Object(
                report
                    .columns
                    .iter()
                    .map(|c| c.to_string())
                    .zip(r.iter().cloned())
                    .collect(),
            )
        })
        .collect();
    let summary: Map<String, Value> = report.summary.iter().cloned().collect();
    json!({
        "schema": 1,
        "command": report.command,
        "seed": seed,
        "config": config.entries(),
        "columns": report.columns,
        "rows": rows,
        "summary": summary,
        "warnings": report.warnings,
        "failures": report.failures,
    })
}

pub fn write_json(report: &Report, seed: u64, config: &Config, mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(report, seed, config))?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("demo", &["n", "value", "label"]);
        r.row(vec![json!(1), json!(0.5), json!("a,b")]);
        r.row(vec![json!(2), json!(1e-20), json!("c")]);
        r.note("max", 0.5);
        r
    }

    #[test]
    fn csv_records_seed_and_quotes() {
        let mut buf = Vec::new();
        write_csv(&sample(), 7, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,value,label,seed\n1,0.5,\"a,b\",7\n2,1e-20,c,7\n");
    }

    #[test]
    fn json_is_versioned() {
        let v = to_json(&sample(), 7, &Config::default());
        assert_eq!(v["schema"], 1);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["rows"][1]["value"], 1e-20);
        assert_eq!(v["summary"]["max"], 0.5);
    }
}
