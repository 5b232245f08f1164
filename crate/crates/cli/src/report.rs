//! Command output. Text reports are `key: value` lines with matrices printed
//! row by row; JSON reports are matrix files carrying the report fields as
//! extra keys, so they can be fed back to other commands.

use std::fmt::Write as _;

use quatpolar::{QMatrix, Quaternion, Tolerance};
use serde_json::{json, Map, Value};

use crate::matfile::MatrixFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub struct Report {
    matrices: MatrixFile,
    /// Report fields in insertion order, for the text form.
    fields: Vec<(String, Value)>,
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn component(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn quaternion_text(q: Quaternion) -> String {
    let mut out = component(q.re);
    for (v, unit) in [(q.i, 'i'), (q.j, 'j'), (q.k, 'k')] {
        if v != 0.0 {
            let sign = if v.is_sign_negative() { '-' } else { '+' };
            let _ = write!(out, "{sign}{}{unit}", component(v.abs()));
        }
    }
    out
}

fn matrix_text(a: &QMatrix) -> String {
    let mut out = String::new();
    for r in 0..a.rows() {
        let row: Vec<String> = (0..a.cols()).map(|c| quaternion_text(a[(r, c)])).collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
    out
}

impl Report {
    pub fn new(n: usize) -> Report {
        Report { matrices: MatrixFile::new(n), fields: Vec::new() }
    }

    pub fn field(&mut self, key: &str, v: impl Into<Value>) -> &mut Report {
        self.fields.push((key.to_string(), v.into()));
        self
    }

    pub fn matrix(&mut self, name: &str, a: &QMatrix) -> &mut Report {
        self.matrices = std::mem::take(&mut self.matrices).with(name, a);
        self
    }

    pub fn tolerances(&mut self, tol: &Tolerance) -> &mut Report {
        self.field(
            "tolerances",
            json!({ "rank": tol.rank_tol, "residual": tol.residual_tol, "cluster": tol.cluster_radius }),
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let extra: Map<String, Value> = self.fields.iter().cloned().collect();
                self.matrices.to_json(&extra)
            }
            Format::Text => {
                let mut out = String::new();
                for (key, v) in &self.fields {
                    match v {
                        Value::Array(items) => {
                            let _ = writeln!(out, "{key}:");
                            for item in items {
                                let _ = writeln!(out, "  {}", text_value(item));
                            }
                        }
                        Value::Object(map) => {
                            let _ = writeln!(out, "{key}:");
                            for (k, item) in map {
                                let _ = writeln!(out, "  {k}: {}", text_value(item));
                            }
                        }
                        _ => {
                            let _ = writeln!(out, "{key}: {}", text_value(v));
                        }
                    }
                }
                for (name, a) in &self.matrices.sections {
                    let _ = write!(out, "{name}:\n{}", matrix_text(a));
                }
                out
            }
        }
    }
}
