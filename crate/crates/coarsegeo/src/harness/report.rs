//! Experiment reports: schema-versioned JSON and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::admissible::ConstantsBundle;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A scalar with its trust flag. Untrusted values come from enumerations
/// that did not stabilise or from truncated searches.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measured {
    pub value: Value,
    pub trusted: bool,
}

/// A rectangular table; `trusted` covers every number in it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub trusted: bool,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), trusted: true }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// One checked condition. A failing condition always carries a witness.
/// An untrusted failure was found on an incomplete enumeration and makes
/// the run inconclusive rather than a violation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub id: String,
    pub anchor: String,
    pub pass: bool,
    pub trusted: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Violation,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub kind: String,
    pub code_version: String,
    pub seed: u64,
    pub inputs: Value,
    pub outcome: Outcome,
    pub conditions: Vec<ConditionEntry>,
    pub values: BTreeMap<String, Measured>,
    pub tables: BTreeMap<String, Table>,
    pub constants: Vec<ConstantsBundle>,
    pub witnesses: Vec<String>,
    /// Set when a budget stopped the run early; the report is partial.
    pub resource_overrun: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn new(kind: &str, seed: u64, inputs: Value) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs,
            outcome: Outcome::Inconclusive,
            conditions: Vec::new(),
            values: BTreeMap::new(),
            tables: BTreeMap::new(),
            constants: Vec::new(),
            witnesses: Vec::new(),
            resource_overrun: None,
            wall_time_ms: None,
        }
    }

    /// Records a condition; `Err` carries the witness of a failure.
    pub fn condition(&mut self, id: impl Into<String>, anchor: &str, result: std::result::Result<(), String>) {
        self.condition_with_trust(id, anchor, result, true);
    }

    pub fn condition_with_trust(
        &mut self,
        id: impl Into<String>,
        anchor: &str,
        result: std::result::Result<(), String>,
        trusted: bool,
    ) {
        let id = id.into();
        let (pass, witness) = match result {
            Ok(()) => (true, None),
            Err(w) => {
                self.witnesses.push(format!("{id}: {w}"));
                (false, Some(w))
            }
        };
        self.conditions.push(ConditionEntry { id, anchor: anchor.to_string(), pass, trusted, witness });
    }

    pub fn value(&mut self, key: &str, value: impl Serialize, trusted: bool) {
        let value = serde_json::to_value(value).expect("plain data serialises");
        self.values.insert(key.to_string(), Measured { value, trusted });
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    /// Violation if a trusted condition failed; otherwise inconclusive when
    /// any condition or number is untrusted or the run stopped early.
    pub fn finish(&mut self) {
        self.outcome = if self.conditions.iter().any(|c| !c.pass && c.trusted) {
            Outcome::Violation
        } else if self.resource_overrun.is_some()
            || self.conditions.is_empty()
            || self.conditions.iter().any(|c| !c.pass)
            || self.values.values().any(|v| !v.trusted)
            || self.tables.values().any(|t| !t.trusted)
        {
            Outcome::Inconclusive
        } else {
            Outcome::Pass
        };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Renders one table as CSV.
pub fn table_csv(t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(&t.columns).map_err(csv_err)?;
    for row in &t.rows {
        w.write_record(row.iter().map(cell)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json` and one `<table>.csv` per table into `dir`, each
/// file atomically. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let json = dir.join("report.json");
    write_atomic(&json, report.to_json().as_bytes())?;
    out.push(json);
    for (name, t) in &report.tables {
        let p = dir.join(format!("{name}.csv"));
        write_atomic(&p, table_csv(t)?.as_bytes())?;
        out.push(p);
    }
    Ok(out)
}

/// Paths at which two JSON documents differ, ignoring wall time.
pub fn diff_json(a: &Value, b: &Value) -> Vec<String> {
    let mut out = Vec::new();
    diff_rec(a, b, String::new(), &mut out);
    out
}

fn diff_rec(a: &Value, b: &Value, path: String, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                if path.is_empty() && k == "wall_time_ms" {
                    continue;
                }
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => diff_rec(u, v, p, out),
                    (Some(_), None) => out.push(format!("{p}: only in the first report")),
                    (None, Some(_)) => out.push(format!("{p}: only in the second report")),
                    (None, None) => {}
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                diff_rec(u, v, format!("{path}[{i}]"), out);
            }
        }
        _ if a != b => out.push(format!("{path}: {a} vs {b}")),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_witness_list_is_present() {
        let mut r = ExperimentReport::new("contract", 1, json!({}));
        r.condition("x", "Definition (Contracting subset)", Ok(()));
        r.finish();
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["witnesses"], json!([]));
        assert_eq!(v["outcome"], json!("pass"));
        assert!(v.get("wall_time_ms").is_none());
    }

    #[test]
    fn failures_carry_witnesses_and_set_the_outcome() {
        let mut r = ExperimentReport::new("contract", 1, json!({}));
        r.condition("x", "anchor", Err("pair (a, b)".into()));
        r.value("n", 3, false);
        r.finish();
        assert_eq!(r.outcome, Outcome::Violation);
        assert_eq!(r.conditions[0].witness.as_deref(), Some("pair (a, b)"));
        assert_eq!(r.witnesses, vec!["x: pair (a, b)".to_string()]);
    }

    #[test]
    fn untrusted_numbers_make_the_run_inconclusive() {
        let mut r = ExperimentReport::new("contract", 1, json!({}));
        r.condition("x", "anchor", Ok(()));
        r.value("n", 3, false);
        r.finish();
        assert_eq!(r.outcome.exit_code(), 2);
    }

    #[test]
    fn untrusted_failures_are_inconclusive() {
        let mut r = ExperimentReport::new("contract", 1, json!({}));
        r.condition("x", "anchor", Ok(()));
        r.condition_with_trust("y", "anchor", Err("truncated".into()), false);
        r.finish();
        assert_eq!(r.outcome, Outcome::Inconclusive);
        assert_eq!(r.witnesses.len(), 1);
    }

    #[test]
    fn csv_rows_follow_columns() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec![json!("D1"), json!(12)]);
        t.push(vec![json!("a, b"), json!(null)]);
        assert_eq!(table_csv(&t).unwrap(), "name,value\nD1,12\n\"a, b\",\n");
    }

    #[test]
    fn diff_ignores_wall_time() {
        let a = json!({"x": [1, 2], "wall_time_ms": 5});
        let b = json!({"x": [1, 3], "wall_time_ms": 9});
        assert_eq!(diff_json(&a, &b), vec!["x[1]: 2 vs 3".to_string()]);
    }

    #[test]
    fn emitted_files_are_complete() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = ExperimentReport::new("constants", 0, json!({"seed": 0}));
        let mut t = Table::new(&["name"]);
        t.push(vec![json!("R1")]);
        r.table("candidates", t);
        r.finish();
        let files = emit_report(&r, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("candidates.csv")).unwrap();
        assert_eq!(text, "name\nR1\n");
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "no temporary files left: {names:?}");
    }
}
