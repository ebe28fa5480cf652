//! Dense complex matrix kernel.
//!
//! Every operator in the crate (effects, projectors, ancilla states,
//! unitaries) is a [`ComplexMatrix`]. Composite systems are ordered
//! system-first, so `kron(rho, sigma)` places the ancilla on the trailing
//! factor and [`partial_trace_ancilla`] traces that factor out.
//!
//! The only numerical primitive is the Hermitian eigendecomposition; the
//! matrix exponential, square roots and inverse square roots are spectral
//! functions built on top of it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Tolerance used by every algebraic predicate unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

/// Builds a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn diag(entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> ComplexMatrix {
    diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

pub fn sigma_x() -> ComplexMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    real_diag(&[1.0, -1.0])
}

/// `n . sigma` for a real 3-vector `n`.
pub fn pauli_dot(n: [f64; 3]) -> ComplexMatrix {
    sigma_x() * C64::from(n[0]) + sigma_y() * C64::from(n[1]) + sigma_z() * C64::from(n[2])
}

/// `|v><v|` for a (not necessarily normalized) vector.
pub fn outer(v: &[C64]) -> ComplexMatrix {
    let col = DVector::from_column_slice(v);
    &col * col.adjoint()
}

/// `|k><k|` on a `dim`-dimensional space.
pub fn basis_projector(dim: usize, k: usize) -> ComplexMatrix {
    let mut m = zeros(dim);
    m[(k, k)] = ONE;
    m
}

/// `|a><b|` on a `dim`-dimensional space.
pub fn matrix_unit(dim: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = zeros(dim);
    m[(a, b)] = ONE;
    m
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            actual: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

fn require_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = require_square(a)?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            actual: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(n)
}

/// `Tr_A[m]` for `m` acting on `system ⊗ ancilla`.
pub fn partial_trace_ancilla(m: &ComplexMatrix, d_sys: usize, d_anc: usize) -> Result<ComplexMatrix> {
    let n = d_sys * d_anc;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} (system {d_sys} x ancilla {d_anc})"),
            actual: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(ComplexMatrix::from_fn(d_sys, d_sys, |i, j| {
        (0..d_anc).map(|a| m[(i * d_anc + a, j * d_anc + a)]).sum()
    }))
}

/// The system operator `(I ⊗ <a|) m (I ⊗ |b>)`.
pub fn ancilla_block(m: &ComplexMatrix, d_sys: usize, d_anc: usize, a: usize, b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_sys, d_sys, |i, j| m[(i * d_anc + a, j * d_anc + b)])
}

/// Assembles `Σ_ab blocks[a][b] ⊗ |a><b|`.
pub fn from_ancilla_blocks(blocks: &[Vec<ComplexMatrix>]) -> ComplexMatrix {
    let d_anc = blocks.len();
    let d_sys = blocks[0][0].nrows();
    ComplexMatrix::from_fn(d_sys * d_anc, d_sys * d_anc, |r, c| {
        blocks[r % d_anc][c % d_anc][(r / d_anc, c / d_anc)]
    })
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn hermiticity_deviation(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && hermiticity_deviation(a) <= tol
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * C64::from(0.5)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_same_square(a, b)?;
    Ok(a * b - b * a)
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_same_square(a, b)?;
    Ok(a * b + b * a)
}

/// `‖[a, b]‖_F` without the shape check; callers guarantee matching shapes.
pub(crate) fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a * b - b * a).norm()
}

pub fn is_projector(p: &ComplexMatrix, tol: f64) -> bool {
    is_hermitian(p, tol) && (p * p - p).norm() <= tol
}

pub fn is_psd(a: &ComplexMatrix, tol: f64) -> bool {
    is_hermitian(a, tol) && min_eigenvalue(a) >= -tol
}

pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part of `a`; callers check Hermiticity.
    pub fn new(a: &ComplexMatrix) -> Self {
        let n = a.nrows();
        let eig = hermitian_part(a).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    /// `Σ_k f(λ_k) |v_k><v_k|`.
    pub fn map<F: Fn(f64) -> C64>(&self, f: F) -> ComplexMatrix {
        let mut left = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let s = f(v);
            left.column_mut(c).iter_mut().for_each(|x| *x *= s);
        }
        left * self.vectors.adjoint()
    }
}

pub fn eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    HermitianEigen::new(a).values
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> f64 {
    eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(a: &ComplexMatrix) -> f64 {
    eigenvalues(a).last().copied().unwrap_or(0.0)
}

/// Number of eigenvalues above `threshold`.
pub fn rank(a: &ComplexMatrix, threshold: f64) -> usize {
    eigenvalues(a).iter().filter(|&&v| v > threshold).count()
}

fn check_hermitian(a: &ComplexMatrix, tol: f64) -> Result<()> {
    require_square(a)?;
    let deviation = hermiticity_deviation(a);
    if deviation > tol.max(tol * a.norm()) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<F: Fn(f64) -> f64>(a: &ComplexMatrix, tol: f64, f: F) -> Result<ComplexMatrix> {
    check_hermitian(a, tol)?;
    Ok(HermitianEigen::new(a).map(|v| C64::from(f(v))))
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-tol, 0)` are
/// clamped to zero; anything below `-tol` is an error.
pub fn psd_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    check_hermitian(a, tol)?;
    let eig = HermitianEigen::new(a);
    if let Some(&lowest) = eig.values.first() {
        if lowest < -tol {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    Ok(eig.map(|v| C64::from(v.max(0.0).sqrt())))
}

/// `a^{-1/2}` for a positive definite `a`.
pub fn inverse_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    check_hermitian(a, tol)?;
    let eig = HermitianEigen::new(a);
    if let Some(&lowest) = eig.values.first() {
        if lowest <= tol {
            return Err(Error::NotPsd { eigenvalue: lowest });
        }
    }
    Ok(eig.map(|v| C64::from(1.0 / v.sqrt())))
}

/// Projection onto the PSD cone in Frobenius norm (negative eigenvalues set to zero).
pub fn psd_part(a: &ComplexMatrix) -> ComplexMatrix {
    let eig = HermitianEigen::new(a);
    if eig.values.first().is_some_and(|&v| v >= 0.0) {
        return hermitian_part(a);
    }
    eig.map(|v| C64::from(v.max(0.0)))
}

/// `W = exp(iH)` for a Hermitian generator `H`.
pub fn unitary_from_generator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_hermitian(h, DEFAULT_TOL)?;
    Ok(HermitianEigen::new(h).map(|v| C64::from_polar(1.0, v)))
}

/// Number of real parameters of a `dim x dim` Hermitian matrix.
pub fn hermitian_param_count(dim: usize) -> usize {
    dim * dim
}

/// Hermitian matrix from `dim²` reals: diagonal first, then (re, im) of the
/// strict upper triangle in row-major order.
pub fn hermitian_from_params(dim: usize, params: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(params.len(), dim * dim);
    let mut h = zeros(dim);
    for i in 0..dim {
        h[(i, i)] = C64::from(params[i]);
    }
    let mut k = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let z = C64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn ket_plus() -> Vec<C64> {
        vec![C64::from(FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2)]
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        assert_eq!(
            kron(&sigma_z(), &basis_projector(2, 0)),
            real_diag(&[1.0, 0.0, -1.0, 0.0])
        );
        let expected = real_matrix(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        assert_eq!(kron(&basis_projector(2, 0), &sigma_x()), expected);
    }

    #[test]
    fn kron_index_convention() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| C64::new(j as f64, i as f64 - 1.0));
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        assert_eq!(
            partial_trace_ancilla(&identity(4), 2, 2).unwrap(),
            identity(2) * C64::from(2.0)
        );

        // |00><00| + |+1><+1|
        let ket00 = [ONE, ZERO, ZERO, ZERO];
        let plus = ket_plus();
        let ket_plus1 = [ZERO, plus[0], ZERO, plus[1]];
        let p_x = outer(&ket00) + outer(&ket_plus1);
        let expected = basis_projector(2, 0) + outer(&plus);
        let got = partial_trace_ancilla(&p_x, 2, 2).unwrap();
        assert!(max_abs_diff(&got, &expected) < 1e-15);

        let rho = real_matrix(2, 2, &[0.7, 0.2, 0.2, 0.3]);
        let sigma = real_matrix(3, 3, &[0.5, 0.1, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.4]);
        let got = partial_trace_ancilla(&kron(&rho, &sigma), 2, 3).unwrap();
        assert!(max_abs_diff(&got, &(rho.clone() * sigma.trace())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let err = partial_trace_ancilla(&identity(5), 2, 2).unwrap_err();
        match err {
            Error::DimensionMismatch { expected, actual } => {
                assert!(expected.starts_with("4x4"));
                assert_eq!(actual, "5x5");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ancilla_blocks_round_trip() {
        let blocks = vec![vec![sigma_x(), sigma_y()], vec![sigma_z(), identity(2)]];
        let m = from_ancilla_blocks(&blocks);
        let expected = kron(&sigma_x(), &matrix_unit(2, 0, 0))
            + kron(&sigma_y(), &matrix_unit(2, 0, 1))
            + kron(&sigma_z(), &matrix_unit(2, 1, 0))
            + kron(&identity(2), &matrix_unit(2, 1, 1));
        assert_eq!(m, expected);
        for (a, row) in blocks.iter().enumerate() {
            for (b, block) in row.iter().enumerate() {
                assert_eq!(&ancilla_block(&m, 2, 2, a, b), block);
            }
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        let r = psd_sqrt(&real_diag(&[4.0, 1.0]), DEFAULT_TOL).unwrap();
        assert!(max_abs_diff(&r, &real_diag(&[2.0, 1.0])) < 1e-14);

        let lam = FRAC_1_SQRT_2;
        let a1 = (identity(2) + sigma_x() * C64::from(lam)) * C64::from(0.5);
        let a2 = (identity(2) - sigma_x() * C64::from(lam)) * C64::from(0.5);
        let r = psd_sqrt(&(a1 * a2), DEFAULT_TOL).unwrap();
        let expected = identity(2) * C64::from(1.0 / (2.0 * SQRT_2));
        assert!(max_abs_diff(&r, &expected) < 1e-14);

        assert_eq!(psd_sqrt(&zeros(3), DEFAULT_TOL).unwrap(), zeros(3));
    }

    #[test]
    fn psd_sqrt_clamps_and_rejects() {
        let r = psd_sqrt(&real_diag(&[1.0, -5e-10]), DEFAULT_TOL).unwrap();
        assert!(max_abs_diff(&r, &real_diag(&[1.0, 0.0])) < 1e-15);
        match psd_sqrt(&real_diag(&[1.0, -1e-3]), DEFAULT_TOL) {
            Err(Error::NotPsd { eigenvalue }) => assert_abs_diff_eq!(eigenvalue, -1e-3, epsilon = 1e-15),
            other => panic!("expected NotPsd, got {other:?}"),
        }
        assert!(matches!(
            psd_sqrt(&(sigma_y() * I), DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn exponential_examples() {
        assert!(max_abs_diff(&unitary_from_generator(&zeros(2)).unwrap(), &identity(2)) < 1e-15);

        let w = unitary_from_generator(&(sigma_z() * C64::from(PI / 2.0))).unwrap();
        assert!(max_abs_diff(&w, &(sigma_z() * I)) < 1e-15);

        let w = unitary_from_generator(&(sigma_x() * C64::from(PI))).unwrap();
        assert!(max_abs_diff(&w, &(-identity(2))) < 1e-14);

        assert!(matches!(
            unitary_from_generator(&(sigma_x() * I)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn predicates() {
        let c = commutator(&sigma_x(), &sigma_y()).unwrap();
        assert!(max_abs_diff(&c, &(sigma_z() * C64::new(0.0, 2.0))) < 1e-15);
        let ac = anticommutator(&sigma_x(), &sigma_y()).unwrap();
        assert!(ac.norm() < 1e-15);
        assert_abs_diff_eq!(frobenius_norm(&identity(2)), SQRT_2, epsilon = 1e-15);
        assert!(is_projector(&outer(&ket_plus()), 1e-10));
        assert!(!is_projector(&(identity(2) * C64::from(0.5)), 1e-10));
        assert!(is_psd(&real_diag(&[0.0, 2.0]), 1e-10));
        assert!(!is_psd(&sigma_z(), 1e-10));
        assert!(commutator(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn hermitian_params_cover_all_entries() {
        let params: Vec<f64> = (0..9).map(|k| k as f64 + 1.0).collect();
        let h = hermitian_from_params(3, &params);
        assert!(is_hermitian(&h, 0.0));
        assert_eq!(h[(0, 0)], C64::from(1.0));
        assert_eq!(h[(2, 2)], C64::from(3.0));
        assert_eq!(h[(0, 1)], C64::new(4.0, 5.0));
        assert_eq!(h[(1, 2)], C64::new(8.0, 9.0));
        assert_eq!(h[(2, 1)], C64::new(8.0, -9.0));
    }
}
