//! Validated POVM, PVM and joint-measurement value types.
//!
//! Outcome indices are 0-based everywhere in the API; reports render them
//! 1-based.

use crate::error::{Error, Result, Violation};
use crate::linalg::{self, ComplexMatrix, C64};

/// A finite-outcome measurement whose effects are Hermitian, lie between
/// `0` and `I`, and sum to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>, dim: usize, tol: f64) -> Result<Self> {
        check_povm(&effects, dim, tol)?;
        Ok(Povm { dim, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, outcome: usize) -> &ComplexMatrix {
        &self.effects[outcome]
    }

    pub fn into_effects(self) -> Vec<ComplexMatrix> {
        self.effects
    }

    /// The same measurement with zero effects appended up to `outcomes`.
    pub fn padded(&self, outcomes: usize) -> Povm {
        let mut effects = self.effects.clone();
        while effects.len() < outcomes {
            effects.push(linalg::zeros(self.dim));
        }
        Povm { dim: self.dim, effects }
    }

    /// Merges outcomes into the groups given by `labels[outcome] = group`.
    pub fn coarse_grain(&self, labels: &[usize], tol: f64) -> Result<Povm> {
        if labels.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} outcomes",
                labels.len(),
                self.len()
            )));
        }
        let groups = labels.iter().max().map_or(0, |&m| m + 1);
        let mut effects = vec![linalg::zeros(self.dim); groups];
        for (effect, &g) in self.effects.iter().zip(labels) {
            effects[g] += effect;
        }
        Povm::new(effects, self.dim, tol)
    }

    /// Largest `‖E_i - F_i‖_F` against another list of effects.
    pub fn max_deviation(&self, other: &[ComplexMatrix]) -> f64 {
        if other.len() != self.len() {
            return f64::INFINITY;
        }
        self.effects
            .iter()
            .zip(other)
            .map(|(a, b)| {
                if a.shape() == b.shape() {
                    (a - b).norm()
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// A POVM whose effects are mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm(Povm);

impl Pvm {
    pub fn new(projectors: Vec<ComplexMatrix>, dim: usize, tol: f64) -> Result<Self> {
        check_povm(&projectors, dim, tol)?;
        check_projective(&projectors, tol)?;
        Ok(Pvm(Povm {
            dim,
            effects: projectors,
        }))
    }

    pub(crate) fn from_unchecked(projectors: Vec<ComplexMatrix>, dim: usize) -> Self {
        Pvm(Povm {
            dim,
            effects: projectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.0.effects
    }

    pub fn projector(&self, outcome: usize) -> &ComplexMatrix {
        &self.0.effects[outcome]
    }

    pub fn as_povm(&self) -> &Povm {
        &self.0
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }
}

pub fn validate_povm(effects: Vec<ComplexMatrix>, dim: usize, tol: f64) -> Result<Povm> {
    Povm::new(effects, dim, tol)
}

pub fn validate_pvm(effects: Vec<ComplexMatrix>, dim: usize, tol: f64) -> Result<Pvm> {
    Pvm::new(effects, dim, tol)
}

fn check_povm(effects: &[ComplexMatrix], dim: usize, tol: f64) -> std::result::Result<(), Violation> {
    if effects.is_empty() {
        return Err(Violation::Empty);
    }
    for (index, e) in effects.iter().enumerate() {
        if e.nrows() != dim || e.ncols() != dim {
            return Err(Violation::Shape {
                index,
                rows: e.nrows(),
                cols: e.ncols(),
                dim,
            });
        }
    }
    for (index, e) in effects.iter().enumerate() {
        let deviation = linalg::hermiticity_deviation(e);
        if deviation > tol {
            return Err(Violation::NotHermitian { index, deviation });
        }
        let spectrum = linalg::eigenvalues(e);
        let min_eigenvalue = spectrum[0];
        if min_eigenvalue < -tol {
            return Err(Violation::NotPositive { index, min_eigenvalue });
        }
        let max_eigenvalue = spectrum[dim - 1];
        if max_eigenvalue > 1.0 + tol {
            return Err(Violation::ExceedsIdentity { index, max_eigenvalue });
        }
    }
    let total: ComplexMatrix = effects.iter().sum();
    let deviation = (total - linalg::identity(dim)).norm();
    if deviation > tol {
        return Err(Violation::Incomplete { deviation });
    }
    Ok(())
}

fn check_projective(projectors: &[ComplexMatrix], tol: f64) -> std::result::Result<(), Violation> {
    for (index, p) in projectors.iter().enumerate() {
        let deviation = (p * p - p).norm();
        if deviation > tol {
            return Err(Violation::NotIdempotent { index, deviation });
        }
    }
    for first in 0..projectors.len() {
        for second in (first + 1)..projectors.len() {
            let deviation = (&projectors[first] * &projectors[second]).norm();
            if deviation > tol {
                return Err(Violation::NotOrthogonal {
                    first,
                    second,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// Cells of a multi-outcome grid `n_1 x ... x n_N`, stored row-major (last
/// axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeGrid {
    shape: Vec<usize>,
    cells: Vec<ComplexMatrix>,
}

impl OutcomeGrid {
    pub fn new(shape: Vec<usize>, cells: Vec<ComplexMatrix>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || shape.contains(&0) || expected != cells.len() {
            return Err(Violation::GridSize {
                shape,
                expected,
                actual: cells.len(),
            }
            .into());
        }
        Ok(OutcomeGrid { shape, cells })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn cells(&self) -> &[ComplexMatrix] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<ComplexMatrix> {
        self.cells
    }

    pub fn axes(&self) -> usize {
        self.shape.len()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        flat_index(&self.shape, index)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        multi_index(&self.shape, flat)
    }

    pub fn cell(&self, index: &[usize]) -> &ComplexMatrix {
        &self.cells[self.flat_index(index)]
    }

    /// Sums the cells over every axis except `axis`.
    pub fn marginal_sums(&self, axis: usize) -> Result<Vec<ComplexMatrix>> {
        if axis >= self.axes() {
            return Err(Error::AxisOutOfRange {
                axis,
                axes: self.axes(),
            });
        }
        let (r, c) = self.cells[0].shape();
        let mut sums = vec![ComplexMatrix::zeros(r, c); self.shape[axis]];
        for (flat, cell) in self.cells.iter().enumerate() {
            sums[self.multi_index(flat)[axis]] += cell;
        }
        Ok(sums)
    }
}

pub fn flat_index(shape: &[usize], index: &[usize]) -> usize {
    index.iter().zip(shape).fold(0, |acc, (&j, &n)| acc * n + j)
}

pub fn multi_index(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut index = vec![0; shape.len()];
    for (slot, &n) in index.iter_mut().zip(shape).rev() {
        *slot = flat % n;
        flat /= n;
    }
    index
}

/// A joint measurement: a POVM whose outcomes are laid out on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPovm {
    dim: usize,
    grid: OutcomeGrid,
}

impl JointPovm {
    pub fn new(dim: usize, shape: Vec<usize>, effects: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let grid = OutcomeGrid::new(shape, effects)?;
        check_povm(grid.cells(), dim, tol)?;
        Ok(JointPovm { dim, grid })
    }

    /// Wraps a validated POVM as a grid of the given shape.
    pub fn from_povm(povm: Povm, shape: Vec<usize>) -> Result<Self> {
        let dim = povm.dim;
        let grid = OutcomeGrid::new(shape, povm.effects)?;
        Ok(JointPovm { dim, grid })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        self.grid.shape()
    }

    pub fn axes(&self) -> usize {
        self.grid.axes()
    }

    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        self.grid.cells()
    }

    pub fn effect(&self, index: &[usize]) -> &ComplexMatrix {
        self.grid.cell(index)
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            dim: self.dim,
            effects: self.grid.cells().to_vec(),
        }
    }

    /// Coarse-grains onto one axis; the result is validated at `tol`.
    pub fn marginal(&self, axis: usize, tol: f64) -> Result<Povm> {
        Povm::new(self.grid.marginal_sums(axis)?, self.dim, tol)
    }

    /// Largest marginal deviation from the given measurements, axis by axis.
    pub fn marginal_deviation(&self, targets: &[&[ComplexMatrix]]) -> Result<f64> {
        if targets.len() != self.axes() {
            return Err(Error::InvalidParameter(format!(
                "{} targets for a {}-axis grid",
                targets.len(),
                self.axes()
            )));
        }
        let mut worst = 0.0f64;
        for (axis, target) in targets.iter().enumerate() {
            let sums = self.grid.marginal_sums(axis)?;
            if sums.len() != target.len() {
                return Ok(f64::INFINITY);
            }
            for (s, t) in sums.iter().zip(target.iter()) {
                worst = worst.max((s - t).norm());
            }
        }
        Ok(worst)
    }
}

pub fn marginal(joint: &JointPovm, axis: usize, tol: f64) -> Result<Povm> {
    joint.marginal(axis, tol)
}

pub const AXIS_X: [f64; 3] = [1.0, 0.0, 0.0];
pub const AXIS_Y: [f64; 3] = [0.0, 1.0, 0.0];
pub const AXIS_Z: [f64; 3] = [0.0, 0.0, 1.0];

/// An unsharp spin-1/2 observable `(I ± λ n·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsharpSpin {
    axis: [f64; 3],
    lambda: f64,
}

impl UnsharpSpin {
    pub fn new(axis: [f64; 3], lambda: f64) -> Result<Self> {
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("axis norm {norm} is not 1")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("unsharpness {lambda} outside [0, 1]")));
        }
        Ok(UnsharpSpin { axis, lambda })
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn povm(&self) -> Povm {
        unsharp_spin(self)
    }
}

pub fn unsharp_spin(obs: &UnsharpSpin) -> Povm {
    let half = C64::from(0.5);
    let s = linalg::pauli_dot(obs.axis) * C64::from(obs.lambda);
    let id = linalg::identity(2);
    Povm {
        dim: 2,
        effects: vec![(&id + &s) * half, (&id - &s) * half],
    }
}

/// The eight-cell candidate joint of unsharp spins along x, y and z.
#[derive(Debug, Clone)]
pub struct TrioJoint {
    pub lambda: f64,
    pub grid: OutcomeGrid,
    /// Smallest eigenvalue of each cell, in flat grid order.
    pub min_eigenvalues: Vec<f64>,
    /// Whether every cell is PSD within the tolerance given at construction.
    pub valid: bool,
}

impl TrioJoint {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn joint(&self, tol: f64) -> Result<JointPovm> {
        JointPovm::new(2, self.grid.shape().to_vec(), self.grid.cells().to_vec(), tol)
    }
}

/// Cells `[I + s_i λσ_x + s_j λσ_y + s_k λσ_z]/8` with `s = +1` for outcome 0
/// and `-1` for outcome 1. The grid is returned even when some cell fails to
/// be PSD; `valid` records whether it is a POVM.
pub fn unsharp_trio_joint(lambda: f64, tol: f64) -> Result<TrioJoint> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("unsharpness {lambda} outside [0, 1]")));
    }
    let sign = |j: usize| if j == 0 { 1.0 } else { -1.0 };
    let shape = vec![2, 2, 2];
    let mut cells = Vec::with_capacity(8);
    for flat in 0..8 {
        let idx = multi_index(&shape, flat);
        let n = [sign(idx[0]) * lambda, sign(idx[1]) * lambda, sign(idx[2]) * lambda];
        cells.push((linalg::identity(2) + linalg::pauli_dot(n)) * C64::from(0.125));
    }
    let min_eigenvalues: Vec<f64> = cells.iter().map(linalg::min_eigenvalue).collect();
    let valid = min_eigenvalues.iter().all(|&v| v >= -tol);
    Ok(TrioJoint {
        lambda,
        grid: OutcomeGrid::new(shape, cells)?,
        min_eigenvalues,
        valid,
    })
}
