//! The result of a command: checks, scalar diagnostics, tables and provenance.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::problem::ProblemSpec;
use crate::table::Table;

/// A residual paired with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="`: pass when `value <= tol`; `">"`: pass when `value > tol`.
    pub relation: &'static str,
    pub tol: f64,
    pub pass: bool,
    /// `"range"` for verdicts on whether data lies in the range, `"numerics"` otherwise.
    pub kind: &'static str,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=",
            tol,
            pass: value <= tol,
            kind: "numerics",
        }
    }

    /// A range verdict: `value <= tol` means the data is in the range.
    pub fn range(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            kind: "range",
            ..Check::at_most(name, value, tol)
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">",
            tol: threshold,
            pass: value > threshold,
            kind: "numerics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub parameters: Value,
    pub versions: BTreeMap<&'static str, &'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultBundle {
    pub command: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub scalars: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Table file names, in output order.
    pub table_files: Vec<String>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_vec_json(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl ResultBundle {
    pub fn new(command: &str, spec: Option<&ProblemSpec>) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("mifht", env!("CARGO_PKG_VERSION"));
        ResultBundle {
            command: command.into(),
            pass: true,
            checks: Vec::new(),
            scalars: BTreeMap::new(),
            warnings: Vec::new(),
            table_files: Vec::new(),
            provenance: Provenance {
                input_sha256: spec.map_or_else(|| "none".into(), |s| s.input_hash.clone()),
                parameters: spec.map_or(Value::Null, |s| serde_json::to_value(s).expect("problem spec serializes")),
                versions,
            },
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn scalar(&mut self, name: &str, v: Value) {
        self.scalars.insert(name.into(), v);
    }

    pub fn warn(&mut self, w: Option<String>) {
        self.warnings.extend(w);
    }

    pub fn table(&mut self, t: Table) {
        self.table_files.push(t.file_name());
        self.tables.push(t);
    }

    pub fn diagnostics_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    /// Writes `diagnostics.json` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let put = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| CliError::io(p, e))
        };
        put("diagnostics.json", &self.diagnostics_json())?;
        for t in &self.tables {
            put(&t.file_name(), &t.to_csv())?;
        }
        Ok(())
    }
}
