//! Tensor-product Naimark extensions.
//!
//! An extension realizes a POVM `{E(i)}` on a `d`-dimensional system as a
//! PVM `{P(i)}` on `system ⊗ ancilla`, with a fixed ancilla state `σ_A`, so
//! that `Tr_A[(I ⊗ σ_A) P(i)] = E(i)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};
use crate::measurements::{JointPovm, Povm, Pvm};

/// Eigenvalues above this count towards an effect's rank.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Candidates whose component orthogonal to the current basis is shorter
/// than this are skipped during orthonormal completion.
pub const COMPLETION_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct NaimarkExtension {
    sys_dim: usize,
    anc_dim: usize,
    ancilla_state: ComplexMatrix,
    pvm: Pvm,
}

impl NaimarkExtension {
    /// Validates the projectors as a PVM on `sys_dim * anc_dim` and the
    /// ancilla state as a density matrix, and checks that the induced
    /// effects form a POVM.
    pub fn new(
        sys_dim: usize,
        anc_dim: usize,
        ancilla_state: ComplexMatrix,
        projectors: Vec<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self> {
        if ancilla_state.shape() != (anc_dim, anc_dim) {
            return Err(Error::DimensionMismatch {
                expected: format!("{anc_dim}x{anc_dim} ancilla state"),
                actual: format!("{}x{}", ancilla_state.nrows(), ancilla_state.ncols()),
            });
        }
        if !linalg::is_psd(&ancilla_state, tol) {
            return Err(Error::NotPsd {
                eigenvalue: linalg::min_eigenvalue(&ancilla_state),
            });
        }
        let trace = ancilla_state.trace();
        if (trace - C64::from(1.0)).norm() > tol {
            return Err(Error::InvalidParameter(format!("ancilla state has trace {trace}")));
        }
        let pvm = Pvm::new(projectors, sys_dim * anc_dim, tol)?;
        let ext = NaimarkExtension {
            sys_dim,
            anc_dim,
            ancilla_state,
            pvm,
        };
        Povm::new(ext.induced_effects(), sys_dim, tol)?;
        Ok(ext)
    }

    pub(crate) fn from_parts(sys_dim: usize, anc_dim: usize, ancilla_state: ComplexMatrix, pvm: Pvm) -> Self {
        NaimarkExtension {
            sys_dim,
            anc_dim,
            ancilla_state,
            pvm,
        }
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn anc_dim(&self) -> usize {
        self.anc_dim
    }

    pub fn ancilla_state(&self) -> &ComplexMatrix {
        &self.ancilla_state
    }

    pub fn pvm(&self) -> &Pvm {
        &self.pvm
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        self.pvm.projectors()
    }

    /// `Tr_A[(I ⊗ σ_A) P(i)]` for every outcome.
    pub fn induced_effects(&self) -> Vec<ComplexMatrix> {
        let lift = linalg::kron(&linalg::identity(self.sys_dim), &self.ancilla_state);
        self.projectors()
            .iter()
            .map(|p| reduce(&(&lift * p), self.sys_dim, self.anc_dim))
            .collect()
    }

    pub fn induced_povm(&self, tol: f64) -> Result<Povm> {
        Povm::new(self.induced_effects(), self.sys_dim, tol)
    }
}

fn reduce(m: &ComplexMatrix, d_sys: usize, d_anc: usize) -> ComplexMatrix {
    linalg::partial_trace_ancilla(m, d_sys, d_anc).expect("extension operators have matching dimensions")
}

/// `Σ_i rank(E_i) - d`, reported as at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AncillaDimension {
    pub dim: usize,
    /// True when `Σ_i rank(E_i) = d`, i.e. the POVM is already projective
    /// and the ancilla is only nominal.
    pub already_projective: bool,
}

pub fn minimal_ancilla_dim(povm: &Povm) -> AncillaDimension {
    let total: usize = povm.effects().iter().map(|e| linalg::rank(e, RANK_THRESHOLD)).sum();
    let raw = total.saturating_sub(povm.dim());
    AncillaDimension {
        dim: raw.max(1),
        already_projective: raw == 0,
    }
}

fn ancilla_ground_state(anc_dim: usize) -> ComplexMatrix {
    linalg::basis_projector(anc_dim, 0)
}

fn check_unitary(u: &ComplexMatrix, dim: usize, tol: f64) -> Result<()> {
    if u.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim} unitary"),
            actual: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let deviation = linalg::unitarity_deviation(u);
    if deviation > tol {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Two-outcome extension on a qubit ancilla prepared in `|0><0|`:
///
/// ```text
/// P(1) = [[ E(1),  -X U^† ],      X = sqrt(E(1) E(2))
///         [ -U X,  U E(2) U^† ]]
/// P(2) = I - P(1)
/// ```
///
/// where block `(a, b)` multiplies `|a><b|` on the ancilla. Passing `-I`
/// for `u` flips the sign of the off-diagonal blocks.
pub fn dichotomic_extension(povm: &Povm, u: &ComplexMatrix, tol: f64) -> Result<NaimarkExtension> {
    if povm.len() != 2 {
        return Err(Error::OutcomeCount {
            expected: 2,
            actual: povm.len(),
        });
    }
    let d = povm.dim();
    check_unitary(u, d, tol)?;
    let (e1, e2) = (povm.effect(0), povm.effect(1));
    let x = linalg::psd_sqrt(&linalg::hermitian_part(&(e1 * e2)), tol)?;
    let p1 = dichotomic_projector(e1, e2, &x, u);
    let p2 = linalg::identity(2 * d) - &p1;
    let pvm = Pvm::new(vec![p1, p2], 2 * d, tol)?;
    Ok(NaimarkExtension::from_parts(d, 2, ancilla_ground_state(2), pvm))
}

pub(crate) fn dichotomic_projector(
    e1: &ComplexMatrix,
    e2: &ComplexMatrix,
    x: &ComplexMatrix,
    u: &ComplexMatrix,
) -> ComplexMatrix {
    let ud = u.adjoint();
    let off_upper = -(x * &ud);
    let off_lower = -(u * x);
    let lower = u * e2 * &ud;
    linalg::from_ancilla_blocks(&[vec![e1.clone(), off_upper], vec![off_lower, lower]])
}

/// Freedoms of the isometric construction used by [`general_extension_with`].
#[derive(Debug, Clone, Default)]
pub struct ExtensionChoice<'a> {
    /// Per-outcome unitaries `U_m` in `A_m = U_m sqrt(E(m))`; identity when absent.
    pub unitaries: Option<&'a [ComplexMatrix]>,
    /// Unitary on the `(n - 1) d` completion columns, applied after
    /// Gram–Schmidt; identity when absent.
    pub completion: Option<&'a ComplexMatrix>,
}

/// n-outcome extension on an n-dimensional ancilla prepared in `|0><0|`.
///
/// The isometry `Σ_m A_m ⊗ |m><0|` with `A_m = U_m sqrt(E(m))` is completed
/// to a unitary `V` by Gram–Schmidt over the canonical basis, and
/// `P(i) = V^† (I ⊗ |i><i|) V`.
pub fn general_extension(povm: &Povm, unitaries: Option<&[ComplexMatrix]>, tol: f64) -> Result<NaimarkExtension> {
    general_extension_with(
        povm,
        &ExtensionChoice {
            unitaries,
            completion: None,
        },
        tol,
    )
}

pub fn general_extension_with(povm: &Povm, choice: &ExtensionChoice<'_>, tol: f64) -> Result<NaimarkExtension> {
    let ext = build_isometric_extension(povm, choice, tol)?;
    // the projectors are exact up to the POVM's own completeness error
    Pvm::new(ext.projectors().to_vec(), ext.sys_dim * ext.anc_dim, tol)?;
    Ok(ext)
}

/// Same construction without re-validating the projectors; used inside
/// optimization loops.
pub(crate) fn build_isometric_extension(
    povm: &Povm,
    choice: &ExtensionChoice<'_>,
    tol: f64,
) -> Result<NaimarkExtension> {
    let n = povm.len();
    let d = povm.dim();
    let big = d * n;

    let mut amps = Vec::with_capacity(n);
    for (m, e) in povm.effects().iter().enumerate() {
        let root = linalg::psd_sqrt(e, tol)?;
        match choice.unitaries {
            Some(us) => {
                if us.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "{} unitaries for {n} outcomes",
                        us.len()
                    )));
                }
                check_unitary(&us[m], d, tol)?;
                amps.push(&us[m] * root);
            }
            None => amps.push(root),
        }
    }

    let mut basis: Vec<DVector<C64>> = (0..d)
        .map(|s| DVector::from_fn(big, |row, _| amps[row % n][(row / n, s)]))
        .collect();

    let needed = big - d;
    let mut completion: Vec<DVector<C64>> = Vec::with_capacity(needed);
    let mut last_residual = 0.0;
    for k in 0..big {
        if completion.len() == needed {
            break;
        }
        let mut v = DVector::from_fn(big, |row, _| if row == k { C64::from(1.0) } else { C64::from(0.0) });
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for b in basis.iter().chain(completion.iter()) {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        last_residual = norm;
        if norm > COMPLETION_THRESHOLD {
            completion.push(v / C64::from(norm));
        }
    }
    if completion.len() < needed {
        return Err(Error::CompletionFailed {
            found: completion.len(),
            needed,
            residual: last_residual,
        });
    }

    if let Some(z) = choice.completion {
        check_unitary(z, needed, tol)?;
        let rotated: Vec<DVector<C64>> = (0..needed)
            .map(|c| {
                let mut col = DVector::zeros(big);
                for (r, v) in completion.iter().enumerate() {
                    col += v * z[(r, c)];
                }
                col
            })
            .collect();
        completion = rotated;
    }

    // column (s, a) of V sits at s * n + a; a = 0 holds the isometry
    let mut v = ComplexMatrix::zeros(big, big);
    let mut extra = completion.into_iter();
    for (s, column) in basis.iter().take(d).enumerate() {
        v.set_column(s * n, column);
        for a in 1..n {
            let col = extra.next().expect("completion has (n - 1) d columns");
            v.set_column(s * n + a, &col);
        }
    }
    basis.clear();

    let projectors: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            let rows = ComplexMatrix::from_fn(d, big, |r, c| v[(r * n + i, c)]);
            rows.adjoint() * rows
        })
        .collect();
    let pvm = Pvm::from_unchecked(projectors, big);
    Ok(NaimarkExtension::from_parts(d, n, ancilla_ground_state(n), pvm))
}

/// Per-outcome reconstruction errors of an extension against a POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    /// `Δ_i = ‖Tr_A[(I ⊗ σ_A) P(i)] - E(i)‖_F`.
    pub deltas: Vec<f64>,
    pub max_delta: f64,
    pub passed: bool,
}

pub fn verify_extension(ext: &NaimarkExtension, povm: &Povm, tol: f64) -> Result<ExtensionReport> {
    if ext.sys_dim() != povm.dim() || ext.pvm().len() != povm.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} outcomes on dimension {}", povm.len(), povm.dim()),
            actual: format!("{} outcomes on dimension {}", ext.pvm().len(), ext.sys_dim()),
        });
    }
    let deltas: Vec<f64> = ext
        .induced_effects()
        .iter()
        .zip(povm.effects())
        .map(|(got, want)| (got - want).norm())
        .collect();
    let max_delta = deltas.iter().copied().fold(0.0, f64::max);
    Ok(ExtensionReport {
        passed: max_delta <= tol,
        deltas,
        max_delta,
    })
}

/// Coarse-grains a grid of orthogonal projectors onto one axis; the result
/// is again a PVM.
pub fn pvm_marginal(joint: &JointPovm, axis: usize, tol: f64) -> Result<Pvm> {
    Pvm::new(joint.effects().to_vec(), joint.dim(), tol)?;
    let sums = joint.grid().marginal_sums(axis)?;
    Pvm::new(sums, joint.dim(), tol).map_err(|e| match e {
        Error::InvalidMeasurement(violation) => Error::MarginalNotProjective { axis, violation },
        other => other,
    })
}
