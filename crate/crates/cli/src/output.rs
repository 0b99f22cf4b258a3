//! CSV tables with a `#` metadata block, and JSON summaries.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

pub struct Meta<'a> {
    pub command: &'a str,
    pub config_hash: String,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn render_csv(meta: &Meta, table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "# bjj {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# command: {}", meta.command).unwrap();
    writeln!(out, "# config_sha256: {}", meta.config_hash).unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| number(v)))
            .expect("in-memory write");
    }
    out.push_str(
        std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("ascii output"),
    );
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

/// Pretty JSON with the metadata fields prepended.
pub fn render_json(meta: &Meta, body: Value) -> String {
    let mut map = serde_json::Map::new();
    map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    map.insert("command".into(), Value::from(meta.command));
    map.insert(
        "config_sha256".into(),
        Value::from(meta.config_hash.clone()),
    );
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("json serializes");
    s.push('\n');
    s
}
