//! JSON measurement documents.
//!
//! ```json
//! {
//!   "schema_version": "1.0",
//!   "dim": 2,
//!   "observables": [
//!     { "name": "A", "effects": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]], ...] },
//!     { "name": "B", "unsharp_spin": { "axis": [1, 0, 0], "lambda": 0.5 } },
//!     { "name": "T", "unsharp_trio": { "lambda": 0.5 } }
//!   ]
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs and matrices are lists of rows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{ComplexMatrix, C64};
use crate::measurements::{unsharp_trio_joint, Povm, UnsharpSpin};

pub const SCHEMA_VERSION: &str = "1.0";

/// Rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmDocument {
    pub schema_version: String,
    pub dim: usize,
    pub observables: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naimark: Option<NaimarkInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observable {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<MatrixRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsharp_spin: Option<SpinShorthand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsharp_trio: Option<TrioShorthand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinShorthand {
    pub axis: [f64; 3],
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrioShorthand {
    pub lambda: f64,
}

/// Present on documents that hold a projective extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaimarkInfo {
    pub source: String,
    pub system_dim: usize,
    pub anc_dim: usize,
    pub ancilla_state: MatrixRows,
}

#[derive(Debug)]
pub enum DocumentError {
    Io {
        path: String,
        message: String,
    },
    /// Malformed JSON or a field of the wrong type; `field` is the path
    /// into the document, e.g. `observables[0].effects[1][0][1]`.
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            DocumentError::Parse {
                field,
                line,
                column,
                message,
            } => write!(f, "parse error at {field} (line {line}, column {column}): {message}"),
        }
    }
}

impl std::error::Error for DocumentError {}

impl PovmDocument {
    pub fn new(dim: usize, observables: Vec<Observable>) -> Self {
        PovmDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            dim,
            observables,
            metadata: None,
            naimark: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: PovmDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            DocumentError::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        de.end().map_err(|e| DocumentError::Parse {
            field: ".".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        for (index, obs) in doc.observables.iter().enumerate() {
            let forms = obs.effects.is_some() as usize
                + obs.unsharp_spin.is_some() as usize
                + obs.unsharp_trio.is_some() as usize;
            if forms != 1 {
                return Err(DocumentError::Parse {
                    field: format!("observables[{index}]"),
                    line: 0,
                    column: 0,
                    message: "exactly one of `effects`, `unsharp_spin`, `unsharp_trio` is required".into(),
                });
            }
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path).map_err(|e| DocumentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        PovmDocument::parse(&text)
    }

    /// Indented JSON with a trailing newline. Complex entries and matrix
    /// rows stay on one line; floats are in shortest round-trip form.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("documents always serialize");
        let mut text = String::new();
        write_value(&value, 0, &mut text);
        text.push('\n');
        text
    }

    pub fn observable(&self, name: &str) -> Option<&Observable> {
        self.observables.iter().find(|o| o.name == name)
    }
}

impl Observable {
    pub fn from_effects(name: impl Into<String>, effects: &[ComplexMatrix]) -> Self {
        Observable {
            name: name.into(),
            effects: Some(effects.iter().map(matrix_to_rows).collect()),
            unsharp_spin: None,
            unsharp_trio: None,
        }
    }

    pub fn spin(name: impl Into<String>, axis: [f64; 3], lambda: f64) -> Self {
        Observable {
            name: name.into(),
            effects: None,
            unsharp_spin: Some(SpinShorthand { axis, lambda }),
            unsharp_trio: None,
        }
    }

    /// Expands shorthands and validates the result as a POVM on `dim`.
    pub fn to_povm(&self, dim: usize, tol: f64) -> Result<Povm, Error> {
        if let Some(spin) = &self.unsharp_spin {
            check_qubit(dim)?;
            return Ok(UnsharpSpin::new(spin.axis, spin.lambda)?.povm());
        }
        if let Some(trio) = &self.unsharp_trio {
            check_qubit(dim)?;
            let joint = unsharp_trio_joint(trio.lambda, tol)?;
            return Ok(joint.joint(tol)?.to_povm());
        }
        let rows = self.effects.as_deref().unwrap_or(&[]);
        let effects = rows.iter().map(rows_to_matrix).collect::<Result<Vec<_>, Error>>()?;
        Povm::new(effects, dim, tol)
    }
}

fn check_qubit(dim: usize) -> Result<(), Error> {
    if dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: "dimension 2 for spin shorthands".into(),
            actual: format!("dimension {dim}"),
        });
    }
    Ok(())
}

fn depth(value: &serde_json::Value) -> Option<usize> {
    match value {
        serde_json::Value::Array(items) => items
            .iter()
            .try_fold(0, |acc, v| depth(v).map(|d| acc.max(d)))
            .map(|d| d + 1),
        serde_json::Value::Object(_) => None,
        _ => Some(0),
    }
}

fn write_value(value: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if depth(value).is_some_and(|d| d <= 2) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(item, indent, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    // adding 0.0 turns -0.0 into 0.0
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re + 0.0, m[(r, c)].im + 0.0])
                .collect()
        })
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows) -> Result<ComplexMatrix, Error> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: format!("rows of length {ncols}"),
            actual: format!("a row of length {}", bad.len()),
        });
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |r, c| {
        let [re, im] = rows[r][c];
        C64::new(re, im)
    }))
}
