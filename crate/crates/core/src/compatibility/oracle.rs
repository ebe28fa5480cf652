use nalgebra::DMatrix;

use super::check_common_dim;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::measurements::{self, JointPovm, Povm};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_iter: usize,
    /// Distance between the two sets below which a grid counts as found.
    pub tol: f64,
    /// Iterations over which the residual must improve.
    pub window: usize,
    /// Minimum relative improvement over `window` before giving up.
    pub stall: f64,
    pub max_cells: usize,
    /// Tolerance for validating the returned joint POVM.
    pub witness_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_iter: 100_000,
            tol: 1e-9,
            window: 200,
            stall: 1e-6,
            max_cells: 64,
            witness_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    /// Iteration cap reached while the residual was still improving.
    Inconclusive,
}

impl FeasibilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeasibilityStatus::Feasible => "feasible",
            FeasibilityStatus::Infeasible => "infeasible",
            FeasibilityStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub iterations: usize,
    /// Frobenius distance between the PSD iterate and its affine projection.
    pub residual: f64,
    pub joint: Option<JointPovm>,
}

impl FeasibilityResult {
    pub fn feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

/// Projector onto the null space of the marginal constraints, acting on
/// the cell index.
fn null_space_projector(shape: &[usize]) -> DMatrix<f64> {
    let cells: usize = shape.iter().product();
    let indices: Vec<Vec<usize>> = (0..cells).map(|k| measurements::multi_index(shape, k)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (axis, &n) in shape.iter().enumerate() {
        for j in 0..n {
            let mut row: Vec<f64> = indices.iter().map(|c| if c[axis] == j { 1.0 } else { 0.0 }).collect();
            for q in &basis {
                let dot: f64 = q.iter().zip(&row).map(|(a, b)| a * b).sum();
                row.iter_mut().zip(q).for_each(|(r, qv)| *r -= dot * qv);
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-10 {
                row.iter_mut().for_each(|v| *v /= norm);
                basis.push(row);
            }
        }
    }
    let mut p = DMatrix::<f64>::identity(cells, cells);
    for q in &basis {
        for r in 0..cells {
            for c in 0..cells {
                p[(r, c)] -= q[r] * q[c];
            }
        }
    }
    p
}

/// Searches for a joint POVM with the given marginals by alternating
/// projections between the per-cell PSD cone and the affine set of grids
/// with those marginals.
pub fn feasibility_oracle(povms: &[Povm], config: &OracleConfig) -> Result<FeasibilityResult> {
    let dim = check_common_dim(povms.iter().map(Povm::dim))?;
    let shape: Vec<usize> = povms.iter().map(Povm::len).collect();
    let cells: usize = shape.iter().product();
    if cells > config.max_cells {
        return Err(Error::GridTooLarge {
            size: cells,
            cap: config.max_cells,
        });
    }

    // a grid with the right marginals: Σ_i M_i(j_i) / (K / n_i) - (N - 1) I / K
    let k = cells as f64;
    let extra = (povms.len() as f64 - 1.0) / k;
    let base: Vec<ComplexMatrix> = (0..cells)
        .map(|flat| {
            let index = measurements::multi_index(&shape, flat);
            let mut m = linalg::identity(dim) * linalg::C64::from(-extra);
            for (povm, &j) in povms.iter().zip(&index) {
                m += povm.effect(j) * linalg::C64::from(povm.len() as f64 / k);
            }
            m
        })
        .collect();
    let null = null_space_projector(&shape);

    let mut x = base.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    for iteration in 1..=config.max_iter {
        let y: Vec<ComplexMatrix> = x.iter().map(linalg::psd_part).collect();
        let diff: Vec<ComplexMatrix> = y.iter().zip(&base).map(|(a, b)| a - b).collect();
        let z: Vec<ComplexMatrix> = (0..cells)
            .map(|r| {
                let mut m = base[r].clone();
                for (c, d) in diff.iter().enumerate() {
                    let w = null[(r, c)];
                    if w != 0.0 {
                        m += d * linalg::C64::from(w);
                    }
                }
                m
            })
            .collect();
        residual = y
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt();
        x = z;

        if residual <= config.tol {
            let effects: Vec<ComplexMatrix> = x.iter().map(linalg::hermitian_part).collect();
            let joint = JointPovm::new(dim, shape, effects, config.witness_tol)?;
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                iterations: iteration,
                residual,
                joint: Some(joint),
            });
        }
        history.push(residual);
        if history.len() > config.window {
            let earlier = history[history.len() - 1 - config.window];
            if earlier - residual <= config.stall * earlier {
                return Ok(FeasibilityResult {
                    status: FeasibilityStatus::Infeasible,
                    iterations: iteration,
                    residual,
                    joint: None,
                });
            }
        }
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Inconclusive,
        iterations: config.max_iter,
        residual,
        joint: None,
    })
}
