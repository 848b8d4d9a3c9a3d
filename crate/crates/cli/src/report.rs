use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

/// Shortest round-trip decimal; blank for NaN so unset exponents stay empty.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug)]
pub struct Report {
    pub experiment: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    /// Nested per-experiment payload for the JSON report.
    pub detail: Map<String, Value>,
    pub pass: bool,
    pub error: Option<String>,
}

impl Report {
    pub fn new(experiment: &'static str, header: &'static [&'static str]) -> Self {
        Report {
            experiment,
            header,
            rows: Vec::new(),
            detail: Map::new(),
            pass: true,
            error: None,
        }
    }

    /// Appends a row; a `FAIL` in the verdict column fails the report.
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        if let Some(i) = self.header.iter().position(|h| *h == "verdict") {
            if row[i] == "FAIL" {
                self.pass = false;
            }
        }
        self.rows.push(row);
    }

    pub fn csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    pub fn json(&self, config: &Value, seed: u64) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), Value::String(v.clone())))
                        .collect(),
                )
            })
            .collect();
        let mut m = Map::new();
        m.insert("experiment".into(), Value::String(self.experiment.into()));
        m.insert("seed".into(), seed.into());
        m.insert("config".into(), config.clone());
        m.insert("pass".into(), self.pass.into());
        m.insert("error".into(), self.error.clone().map_or(Value::Null, Value::String));
        m.insert("rows".into(), Value::Array(rows));
        m.insert("detail".into(), Value::Object(self.detail.clone()));
        Value::Object(m)
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path, config: &Value, seed: u64) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&csv_path, self.csv().map_err(std::io::Error::other)?)?;
        let mut text = serde_json::to_string_pretty(&self.json(config, seed)).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(&json_path, text)?;
        Ok((csv_path, json_path))
    }
}
