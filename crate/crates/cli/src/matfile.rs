//! The matrix file: a JSON object with dimensions `n` (rows) and optional `m`,
//! plus named matrix sections. Section names start with an upper-case letter;
//! each section is a row-major nested list of quadruples `[x0, x1, x2, x3]`
//! standing for `x0 + x1 i + x2 j + x3 k`. Lower-case keys other than `n` and
//! `m` carry report data and are ignored by the reader.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use quatpolar::{QMatrix, Quaternion};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixFile {
    pub n: usize,
    pub m: Option<usize>,
    pub sections: BTreeMap<String, QMatrix>,
}

fn is_section_name(key: &str) -> bool {
    key.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn dimension(doc: &serde_json::Map<String, Value>, key: &str) -> Result<Option<usize>, CliError> {
    match doc.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|d| Some(d as usize))
            .ok_or_else(|| invalid(format!("`{key}` must be a non-negative integer"))),
    }
}

fn parse_quaternion(v: &Value, name: &str, r: usize, c: usize) -> Result<Quaternion, CliError> {
    let bad = || invalid(format!("section {name}, entry ({r}, {c}): expected a quadruple of numbers"));
    let parts = v.as_array().ok_or_else(bad)?;
    if parts.len() != 4 {
        return Err(bad());
    }
    let mut x = [0.0; 4];
    for (slot, p) in x.iter_mut().zip(parts) {
        *slot = p.as_f64().ok_or_else(bad)?;
    }
    Ok(Quaternion::new(x[0], x[1], x[2], x[3]))
}

fn parse_section(v: &Value, name: &str) -> Result<QMatrix, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| invalid(format!("section {name} must be a list of rows")))?;
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| invalid(format!("section {name}, row {r} must be a list")))?;
        out.push(
            row.iter()
                .enumerate()
                .map(|(c, e)| parse_quaternion(e, name, r, c))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    if let Some(w) = out.first().map(Vec::len) {
        if out.iter().any(|row| row.len() != w) {
            return Err(invalid(format!("section {name} has rows of different lengths")));
        }
    }
    Ok(QMatrix::from_rows(out))
}

impl MatrixFile {
    pub fn new(n: usize) -> MatrixFile {
        MatrixFile { n, m: None, sections: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, a: &QMatrix) -> MatrixFile {
        if a.cols() != self.n {
            self.m = Some(a.cols());
        }
        self.sections.insert(name.to_string(), a.clone());
        self
    }

    pub fn parse(text: &str) -> Result<MatrixFile, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| invalid(format!("not a matrix file: {e}")))?;
        let doc = doc.as_object().ok_or_else(|| invalid("a matrix file is a JSON object"))?;
        let n = dimension(doc, "n")?.ok_or_else(|| invalid("missing dimension `n`"))?;
        let m = dimension(doc, "m")?;
        let mut sections = BTreeMap::new();
        for (key, v) in doc.iter().filter(|(k, _)| is_section_name(k)) {
            let a = parse_section(v, key)?;
            // an empty section has no rows to measure, so its shape is taken as n x 0
            let a = if a.rows() == 0 { QMatrix::zeros(n, 0) } else { a };
            let cols_ok = a.cols() == n || Some(a.cols()) == m;
            if a.rows() != n || !cols_ok {
                return Err(invalid(format!(
                    "section {key} is {}x{}, expected {n} rows and {n}{} columns",
                    a.rows(),
                    a.cols(),
                    m.map(|m| format!(" or {m}")).unwrap_or_default()
                )));
            }
            sections.insert(key.clone(), a);
        }
        Ok(MatrixFile { n, m, sections })
    }

    pub fn get(&self, name: &str) -> Option<&QMatrix> {
        self.sections.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&QMatrix, CliError> {
        self.get(name).ok_or_else(|| invalid(format!("missing section {name}")))
    }

    /// JSON text with every entry at 17 significant digits, followed by the
    /// `extra` report fields.
    pub fn to_json(&self, extra: &serde_json::Map<String, Value>) -> String {
        let mut out = String::from("{\n");
        let _ = write!(out, "  \"n\": {}", self.n);
        if let Some(m) = self.m {
            let _ = write!(out, ",\n  \"m\": {m}");
        }
        for (name, a) in &self.sections {
            let _ = write!(out, ",\n  \"{name}\": {}", matrix_json(a));
        }
        for (key, v) in extra {
            let _ = write!(out, ",\n  {}: {}", Value::String(key.clone()), v);
        }
        out.push_str("\n}\n");
        out
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any `f64`.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn matrix_json(a: &QMatrix) -> String {
    let rows: Vec<String> = (0..a.rows())
        .map(|r| {
            let entries: Vec<String> = (0..a.cols())
                .map(|c| {
                    let q = a[(r, c)];
                    format!("[{}, {}, {}, {}]", number(q.re), number(q.i), number(q.j), number(q.k))
                })
                .collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[\n    {}\n  ]", rows.join(",\n    "))
}
