use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "lagfib.v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:?}"),
            Cell::I(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) => quote(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// What a subcommand produced, before formatting.
#[derive(Debug, Clone)]
pub struct Output {
    pub result: Value,
    pub table: Option<Table>,
    /// `check` reports failures through the exit code, not as an error.
    pub failed: bool,
}

impl Output {
    pub fn new(result: Value, table: Option<Table>) -> Self {
        Output {
            result,
            table,
            failed: false,
        }
    }
}

pub fn envelope(command: &str, cfg: &RunConfig, result: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command,
        "seed": cfg.seed,
        "config": cfg,
        "result": result,
    })
}

pub fn render(command: &str, cfg: &RunConfig, out: &Output) -> CliResult<Vec<u8>> {
    match cfg.format {
        "csv" => {
            let table = out
                .table
                .as_ref()
                .ok_or_else(|| CliError::usage(format!("`{command}` has no CSV form; use --format json")))?;
            Ok(table.to_csv().into_bytes())
        }
        _ => {
            let mut s = serde_json::to_string_pretty(&envelope(command, cfg, out.result.clone()))
                .map_err(|e| CliError::io(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_floats() {
        let mut t = Table::new(["x", "label"]);
        let x = 0.1 + 0.2;
        t.push(vec![x.into(), "a,b".into()]);
        t.push(vec![f64::NAN.into(), "plain".into()]);
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let first = line.split(',').next().unwrap();
        assert_eq!(first.parse::<f64>().unwrap(), x);
        assert!(line.ends_with("\"a,b\""));
        assert!(csv.lines().nth(2).unwrap().starts_with("NaN,"));
    }
}
