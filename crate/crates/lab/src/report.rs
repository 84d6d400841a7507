//! Report encoding: schema-versioned JSON with numbers frozen at 12
//! significant digits, tab-separated time series and plain text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dispersive_core::matrix::CMatrix;
use serde_json::{json, Map, Value};

use crate::error::LabResult;

pub const SCHEMA_VERSION: u32 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`].
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every number in `v`; non-finite numbers become `null`.
pub fn freeze(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => serde_json::Number::from_f64(round_sig(x))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(freeze).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, freeze(v))).collect()),
        other => other,
    }
}

/// `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Wraps a command's body with the schema header and freezes the numbers.
pub fn envelope(command: &str, body: Value) -> Value {
    let mut root = Map::new();
    root.insert("schema_version".into(), json!(SCHEMA_VERSION));
    root.insert("command".into(), json!(command));
    if let Value::Object(fields) = body {
        root.extend(fields);
    } else {
        root.insert("result".into(), body);
    }
    freeze(Value::Object(root))
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Matrix as `[[[re, im], ...], ...]`, row major.
pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.dim())
            .map(|r| {
                Value::Array(
                    (0..m.dim())
                        .map(|c| json!([num(m[(r, c)].re), num(m[(r, c)].im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Tab-separated table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.header.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// A number as written to TSV and text output.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let r = round_sig(x);
    let mut s = String::new();
    if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        write!(s, "{r:e}")
    } else {
        write!(s, "{r}")
    }
    .expect("writing to a string");
    s
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_else(|| "nan".into())
}

/// Writes named artifacts into the output directory, creating it.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> LabResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> LabResult<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}
