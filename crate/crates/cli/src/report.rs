//! CSV tables and the JSON summary written by every command.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip form, so reruns are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", self.name)))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything one command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    pub results: serde_json::Map<String, Value>,
    pub witnesses: Vec<Value>,
}

impl Output {
    pub fn result(&mut self, key: &str, v: impl serde::Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(v).expect("serializable result"));
    }
}

pub fn emit(
    out: &Output,
    dir: &Path,
    command: &str,
    seed: u64,
    config: &BTreeMap<String, String>,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for t in &out.tables {
        t.write(dir)?;
    }
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "config": config,
        "tables": out.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        "results": out.results,
        "witnesses": out.witnesses,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}
