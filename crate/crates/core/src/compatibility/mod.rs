//! Compatibility of measurement sets: commutation of projective extensions,
//! joint measurements built from them, a convex-feasibility oracle and a
//! restricted-family incompatibility estimate.

mod estimator;
mod oracle;

pub use estimator::{incompatibility_estimate, EstimatorConfig, IncompatibilityEstimate};
pub use oracle::{feasibility_oracle, FeasibilityResult, FeasibilityStatus, OracleConfig};

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::measurements::{self, JointPovm, Pvm};
use crate::naimark::NaimarkExtension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    CompatibleCertified,
    IncompatibleCertified,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CompatibleCertified => "compatible-certified",
            Verdict::IncompatibleCertified => "incompatible-certified",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pairwise commutator norms between measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    /// `norms[i][l]` is `max_{j,k} ‖[P_i(j), P_l(k)]‖_F`; the diagonal is 0.
    pub norms: Vec<Vec<f64>>,
    pub max_norm: f64,
    /// Pair attaining `max_norm`, if there is more than one measurement.
    pub worst_pair: Option<(usize, usize)>,
    pub commute: bool,
}

fn commutation_report(sets: &[&[ComplexMatrix]], tol: f64) -> CommutationReport {
    let count = sets.len();
    let mut norms = vec![vec![0.0; count]; count];
    let mut max_norm = 0.0;
    let mut worst_pair = None;
    for i in 0..count {
        for l in i + 1..count {
            let mut worst = 0.0f64;
            for p in sets[i] {
                for q in sets[l] {
                    worst = worst.max(linalg::commutator_norm(p, q));
                }
            }
            norms[i][l] = worst;
            norms[l][i] = worst;
            if worst_pair.is_none() || worst > max_norm {
                max_norm = worst;
                worst_pair = Some((i, l));
            }
        }
    }
    CommutationReport {
        norms,
        max_norm,
        worst_pair,
        commute: max_norm <= tol,
    }
}

fn check_common_dim(dims: impl Iterator<Item = usize>) -> Result<usize> {
    let mut common = None;
    for d in dims {
        match common {
            None => common = Some(d),
            Some(c) if c != d => {
                return Err(Error::DimensionMismatch {
                    expected: format!("dimension {c}"),
                    actual: format!("dimension {d}"),
                })
            }
            _ => {}
        }
    }
    common.ok_or_else(|| Error::InvalidParameter("no measurements supplied".into()))
}

pub fn pvms_pairwise_commute(pvms: &[Pvm], tol: f64) -> Result<CommutationReport> {
    check_common_dim(pvms.iter().map(Pvm::dim))?;
    let sets: Vec<&[ComplexMatrix]> = pvms.iter().map(Pvm::projectors).collect();
    Ok(commutation_report(&sets, tol))
}

fn product_grid(sets: &[&[ComplexMatrix]], dim: usize) -> (Vec<usize>, Vec<ComplexMatrix>) {
    let shape: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let total: usize = shape.iter().product();
    let cells = (0..total)
        .map(|flat| {
            measurements::multi_index(&shape, flat)
                .iter()
                .zip(sets)
                .fold(linalg::identity(dim), |acc, (&j, set)| acc * &set[j])
        })
        .collect();
    (shape, cells)
}

/// The grid of products `P_1(j_1) ⋯ P_N(j_N)` of pairwise commuting PVMs.
pub fn joint_pvm_from_commuting(pvms: &[Pvm], tol: f64) -> Result<JointPovm> {
    let report = pvms_pairwise_commute(pvms, tol)?;
    if !report.commute {
        let (first, second) = report.worst_pair.unwrap_or((0, 0));
        return Err(Error::NotCommuting {
            first,
            second,
            norm: report.max_norm,
        });
    }
    let sets: Vec<&[ComplexMatrix]> = pvms.iter().map(Pvm::projectors).collect();
    let (shape, cells) = product_grid(&sets, pvms[0].dim());
    let cells = cells.iter().map(linalg::hermitian_part).collect();
    let joint = JointPovm::new(pvms[0].dim(), shape, cells, tol)?;
    Ok(joint)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub verdict: Verdict,
    /// Joint POVM on the system, present iff the verdict is compatible.
    pub witness: Option<JointPovm>,
    pub commutators: CommutationReport,
    /// Per-axis `max_j ‖marginal(j) - E(j)‖_F` of the witness; empty without one.
    pub marginal_deltas: Vec<f64>,
}

/// Commuting extensions sharing one ancilla state yield a joint measurement
/// by multiplying their projectors and reducing to the system. Extensions
/// that fail to commute prove nothing either way.
pub fn joint_povm_from_common_extension(exts: &[NaimarkExtension], tol: f64) -> Result<CompatReport> {
    let sys_dim = check_common_dim(exts.iter().map(NaimarkExtension::sys_dim))?;
    let anc_dim = exts[0].anc_dim();
    if let Some(other) = exts.iter().find(|e| e.anc_dim() != anc_dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("ancilla dimension {anc_dim}"),
            actual: format!("ancilla dimension {}", other.anc_dim()),
        });
    }
    let sigma = exts[0].ancilla_state();
    for (index, ext) in exts.iter().enumerate().skip(1) {
        let deviation = linalg::max_abs_diff(sigma, ext.ancilla_state());
        if deviation > tol {
            return Err(Error::AncillaStateMismatch {
                first: 0,
                second: index,
                deviation,
            });
        }
    }

    let sets: Vec<&[ComplexMatrix]> = exts.iter().map(NaimarkExtension::projectors).collect();
    let commutators = commutation_report(&sets, tol);
    if !commutators.commute {
        return Ok(CompatReport {
            verdict: Verdict::Inconclusive,
            witness: None,
            commutators,
            marginal_deltas: Vec::new(),
        });
    }

    let big = sys_dim * anc_dim;
    let (shape, cells) = product_grid(&sets, big);
    let lift = linalg::kron(&linalg::identity(sys_dim), sigma);
    let reduced = cells
        .iter()
        .map(|cell| {
            let r = linalg::partial_trace_ancilla(&(&lift * cell), sys_dim, anc_dim)?;
            Ok(linalg::hermitian_part(&r))
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = JointPovm::new(sys_dim, shape, reduced, tol)?;

    let marginal_deltas = exts
        .iter()
        .enumerate()
        .map(|(axis, ext)| {
            let sums = witness.grid().marginal_sums(axis)?;
            Ok(sums
                .iter()
                .zip(ext.induced_effects())
                .map(|(s, e)| (s - e).norm())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let verdict = if marginal_deltas.iter().all(|&d| d <= tol) {
        Verdict::CompatibleCertified
    } else {
        Verdict::Inconclusive
    };
    Ok(CompatReport {
        witness: (verdict == Verdict::CompatibleCertified).then_some(witness),
        verdict,
        commutators,
        marginal_deltas,
    })
}
