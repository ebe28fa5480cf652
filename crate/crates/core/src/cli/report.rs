//! Machine-readable reports; the human format is rendered from them.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::document::{matrix_to_rows, MatrixRows};
use crate::linalg::ComplexMatrix;
use crate::measurements::{JointPovm, Povm};

pub const REPORT_SCHEMA: &str = "naimark-lab.report/1";

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: String,
    pub file: String,
    pub observables: Vec<ObservableSummary>,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub methods: Vec<MethodReport>,
}

#[derive(Debug, Serialize)]
pub struct ObservableSummary {
    pub name: String,
    pub outcomes: usize,
    pub dim: usize,
}

#[derive(Debug, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub verdict: String,
    /// Name and value of the method's figure of merit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<(String, f64)>,
    /// Objective evaluations or iterations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Witness {
    pub shape: Vec<usize>,
    /// Grid cells in row-major order, last axis fastest.
    pub effects: Vec<MatrixRows>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<MatrixRows>,
}

impl Witness {
    pub fn from_joint(joint: &JointPovm, w: Option<&ComplexMatrix>) -> Self {
        Witness {
            shape: joint.shape().to_vec(),
            effects: joint.effects().iter().map(matrix_to_rows).collect(),
            w: w.map(matrix_to_rows),
        }
    }
}

impl MethodReport {
    pub fn new(method: &str) -> Self {
        MethodReport {
            method: method.into(),
            verdict: "inconclusive".into(),
            metric: None,
            evaluations: None,
            converged: None,
            witness: None,
            note: None,
            error: None,
        }
    }
}

impl CheckReport {
    pub fn new(file: &Path, named: &[(String, Povm)], seed: u64, tol: f64) -> Self {
        CheckReport {
            schema_version: REPORT_SCHEMA.into(),
            file: file.display().to_string(),
            observables: named
                .iter()
                .map(|(name, p)| ObservableSummary {
                    name: name.clone(),
                    outcomes: p.len(),
                    dim: p.dim(),
                })
                .collect(),
            seed,
            tol,
            note: None,
            methods: Vec::new(),
        }
    }

    pub fn render_human(&self) -> String {
        let mut s = String::new();
        let list: Vec<String> = self
            .observables
            .iter()
            .map(|o| format!("{} ({} outcomes)", o.name, o.outcomes))
            .collect();
        let _ = writeln!(s, "observables: {}", list.join(", "));
        if let Some(first) = self.observables.first() {
            let _ = writeln!(s, "dimension {}, seed {}, tol {:e}", first.dim, self.seed, self.tol);
        }
        if let Some(note) = &self.note {
            let _ = writeln!(s, "verdict: compatible ({note})");
        }
        for m in &self.methods {
            let _ = write!(s, "{}: {}", m.method, m.verdict);
            let mut details = Vec::new();
            if let Some((name, value)) = &m.metric {
                details.push(format!("{name} = {value:e}"));
            }
            if let Some(n) = m.evaluations {
                details.push(format!("{n} evaluations"));
            }
            if let Some(c) = m.converged {
                details.push(if c {
                    "converged".to_string()
                } else {
                    "not converged".to_string()
                });
            }
            if !details.is_empty() {
                let _ = write!(s, " ({})", details.join(", "));
            }
            s.push('\n');
            if let Some(w) = &m.witness {
                let _ = writeln!(
                    s,
                    "  witness: joint measurement on a {:?} grid (matrices in --format machine)",
                    w.shape
                );
            }
            if let Some(note) = &m.note {
                let _ = writeln!(s, "  note: {note}");
            }
            if let Some(error) = &m.error {
                let _ = writeln!(s, "  error: {error}");
            }
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct NaimarkReport {
    pub schema_version: String,
    pub observable: String,
    pub construction: String,
    pub outcomes: usize,
    pub system_dim: usize,
    pub anc_dim: usize,
    pub minimal_anc_dim: usize,
    pub already_projective: bool,
    pub projector_dim: usize,
    pub deltas: Vec<f64>,
    pub max_delta: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl NaimarkReport {
    pub fn render_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "observable {}: {} outcomes on dimension {}",
            self.observable, self.outcomes, self.system_dim
        );
        let _ = writeln!(
            s,
            "{} extension: ancilla dimension {} (minimal {}{}), projectors {}x{}",
            self.construction,
            self.anc_dim,
            self.minimal_anc_dim,
            if self.already_projective {
                ", already projective"
            } else {
                ""
            },
            self.projector_dim,
            self.projector_dim
        );
        for (i, d) in self.deltas.iter().enumerate() {
            let _ = writeln!(s, "  delta({}) = {d:e}", i + 1);
        }
        let _ = writeln!(
            s,
            "max delta {:e} {} tol {:e}",
            self.max_delta,
            if self.passed { "<=" } else { ">" },
            self.tol
        );
        if let Some(out) = &self.out {
            let _ = writeln!(s, "extension written to {out}");
        }
        s
    }
}
