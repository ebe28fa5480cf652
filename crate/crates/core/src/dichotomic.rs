//! Two-outcome measurement pairs: the unitary-W commutation conditions for
//! their two-block extensions, the spin-1/2 specialization, W search and
//! region scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compatibility::{feasibility_oracle, FeasibilityStatus, OracleConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64, DEFAULT_TOL};
use crate::measurements::{JointPovm, Povm, UnsharpSpin};
use crate::naimark::dichotomic_extension;
use crate::optim::NelderMead;

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicPair {
    a: Povm,
    b: Povm,
    x: ComplexMatrix,
    y: ComplexMatrix,
}

fn gap_root(povm: &Povm, tol: f64) -> Result<ComplexMatrix> {
    if povm.len() != 2 {
        return Err(Error::OutcomeCount {
            expected: 2,
            actual: povm.len(),
        });
    }
    let product = povm.effect(0) * povm.effect(1);
    let deviation = linalg::hermiticity_deviation(&product);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    linalg::psd_sqrt(&linalg::hermitian_part(&product), tol)
}

impl DichotomicPair {
    pub fn new(a: Povm, b: Povm, tol: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension {}", a.dim()),
                actual: format!("dimension {}", b.dim()),
            });
        }
        let x = gap_root(&a, tol)?;
        let y = gap_root(&b, tol)?;
        Ok(DichotomicPair { a, b, x, y })
    }

    pub fn from_spins(first: &UnsharpSpin, second: &UnsharpSpin) -> Self {
        DichotomicPair::new(first.povm(), second.povm(), DEFAULT_TOL).expect("unsharp spins form a valid pair")
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &Povm {
        &self.a
    }

    pub fn b(&self) -> &Povm {
        &self.b
    }

    /// `sqrt(A(1) A(2))`.
    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    /// `sqrt(B(1) B(2))`.
    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }
}

/// A unitary `W = exp(i H)` with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct WCandidate {
    pub generator: ComplexMatrix,
    pub w: ComplexMatrix,
    pub residual: f64,
}

fn check_w(w: &ComplexMatrix, dim: usize) -> Result<()> {
    if w.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim} unitary"),
            actual: format!("{}x{}", w.nrows(), w.ncols()),
        });
    }
    let deviation = linalg::unitarity_deviation(w);
    if deviation > DEFAULT_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Frobenius norms of the three W conditions:
///
/// ```text
/// [A(1), B(1)] = Y W X - (W X)^† Y
/// {A(1), Y W} - {X W^†, B(1)} W = Y W - X
/// [W A(1) W^†, B(1)] + W X Y - Y (W X)^† = 0
/// ```
pub fn w_residual_terms(pair: &DichotomicPair, w: &ComplexMatrix) -> Result<[f64; 3]> {
    check_w(w, pair.dim())?;
    Ok(residual_terms_unchecked(pair, w))
}

fn residual_terms_unchecked(pair: &DichotomicPair, w: &ComplexMatrix) -> [f64; 3] {
    let a1 = pair.a.effect(0);
    let b1 = pair.b.effect(0);
    let (x, y) = (&pair.x, &pair.y);
    let wd = w.adjoint();
    let wx = w * x;
    let wxd = wx.adjoint();
    let yw = y * w;
    let xwd = x * &wd;

    let c1 = (a1 * b1 - b1 * a1) - (y * &wx - &wxd * y);
    let c2 = (a1 * &yw + &yw * a1) - (&xwd * b1 + b1 * &xwd) * w - (&yw - x);
    let rotated = w * a1 * &wd;
    let c3 = (&rotated * b1 - b1 * &rotated) + &wx * y - y * &wxd;
    [c1.norm(), c2.norm(), c3.norm()]
}

/// Sum of the three condition norms; zero means the two extensions with
/// `V^† U = W` commute, so the pair is compatible.
pub fn w_residual(pair: &DichotomicPair, w: &ComplexMatrix) -> Result<f64> {
    Ok(w_residual_terms(pair, w)?.iter().sum())
}

/// The W conditions written for unsharp spins, where `X` and `Y` are
/// multiples of the identity:
///
/// ```text
/// λ1 λ2 [n1·σ, n2·σ] = sqrt(1-λ1²) sqrt(1-λ2²) (W - W^†)
/// λ1 sqrt(1-λ2²) {n1·σ/2, W} - λ2 sqrt(1-λ1²) W^† {n2·σ/2, W} = 0
/// λ1 λ2 [W n1·σ W^†, n2·σ] + sqrt((1-λ1²)(1-λ2²)) (W - W^†) = 0
/// ```
///
/// Returned norms are scaled by 1/4, 1/2 and 1/4 so that they match
/// [`w_residual_terms`] term by term.
pub fn spin_w_residual_terms(first: &UnsharpSpin, second: &UnsharpSpin, w: &ComplexMatrix) -> Result<[f64; 3]> {
    check_w(w, 2)?;
    let (l1, l2) = (first.lambda(), second.lambda());
    let (s1, s2) = ((1.0 - l1 * l1).sqrt(), (1.0 - l2 * l2).sqrt());
    let n1 = linalg::pauli_dot(first.axis());
    let n2 = linalg::pauli_dot(second.axis());
    let wd = w.adjoint();
    let skew = w - &wd;
    let re = |v: f64| C64::from(v);

    let c1 = (&n1 * &n2 - &n2 * &n1) * re(l1 * l2) - &skew * re(s1 * s2);
    let half = re(0.5);
    let anti1 = (&n1 * w + w * &n1) * half;
    let anti2 = (&n2 * w + w * &n2) * half;
    let c2 = anti1 * re(l1 * s2) - &wd * anti2 * re(l2 * s1);
    let rotated = w * &n1 * &wd;
    let c3 = (&rotated * &n2 - &n2 * &rotated) * re(l1 * l2) + &skew * re(s1 * s2);
    Ok([c1.norm() / 4.0, c2.norm() / 2.0, c3.norm() / 4.0])
}

pub fn spin_w_residual(first: &UnsharpSpin, second: &UnsharpSpin, w: &ComplexMatrix) -> Result<f64> {
    Ok(spin_w_residual_terms(first, second, w)?.iter().sum())
}

/// Angle θ for which `W = e^{iθ} σ_z` satisfies the conditions of the
/// unsharp x/y pair, or `None` outside `λ1² + λ2² ≤ 1`. When either λ is
/// zero the angle is 0, i.e. `W = σ_z`.
pub fn xy_closed_form_theta(lambda1: f64, lambda2: f64) -> Option<f64> {
    let outside = lambda1 * lambda1 + lambda2 * lambda2 - 1.0;
    if outside > 1e-12 {
        return None;
    }
    let product = lambda1 * lambda2;
    if product == 0.0 {
        return Some(0.0);
    }
    let denom = ((1.0 - lambda1 * lambda1) * (1.0 - lambda2 * lambda2)).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((product / denom).min(1.0).asin())
}

/// `e^{iθ} σ_z`.
pub fn closed_form_w(theta: f64) -> ComplexMatrix {
    linalg::sigma_z() * C64::from_polar(1.0, theta)
}

#[derive(Debug, Clone)]
pub struct WSearchConfig {
    pub restarts: usize,
    /// Residual evaluations per restart.
    pub budget: usize,
    /// Residual at or below which a candidate counts as found.
    pub tol: f64,
    pub seed: u64,
}

impl Default for WSearchConfig {
    fn default() -> Self {
        WSearchConfig {
            restarts: 8,
            budget: 5000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WSearch {
    /// Present iff a unitary with residual ≤ tol was found.
    pub candidate: Option<WCandidate>,
    pub best_residual: f64,
    pub restarts_used: usize,
    pub evaluations: usize,
}

/// Random points drawn per restart; the simplex starts from the best.
const SCREENED_STARTS: usize = 32;

/// Minimizes the W residual over Hermitian generators, starting from the
/// zero generator and then from seeded random points. A miss is
/// inconclusive: the conditions are sufficient, not necessary.
pub fn find_w(pair: &DichotomicPair, config: &WSearchConfig) -> WSearch {
    let d = pair.dim();
    let count = linalg::hermitian_param_count(d);
    let unitary = |p: &[f64]| {
        let h = linalg::hermitian_from_params(d, p);
        let w = linalg::unitary_from_generator(&h).expect("generator is Hermitian by construction");
        (h, w)
    };
    // The squared terms are smooth at a solution, where the plain sum of
    // norms has a kink that stalls the simplex.
    let objective = |p: &[f64]| {
        let (_, w) = unitary(p);
        residual_terms_unchecked(pair, &w).iter().map(|t| t * t).sum::<f64>()
    };
    let residual = |p: &[f64]| {
        let (_, w) = unitary(p);
        residual_terms_unchecked(pair, &w).iter().sum::<f64>()
    };
    let target = (config.tol * 1e-3).powi(2);
    let screened_start = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut probe = || -> Vec<f64> {
            (0..count)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        };
        let mut start = probe();
        let mut start_value = objective(&start);
        for _ in 1..SCREENED_STARTS {
            let p = probe();
            let v = objective(&p);
            if v < start_value {
                start = p;
                start_value = v;
            }
        }
        start
    };

    // Each restart spends its budget on local solves: from the zero
    // generator (restart 0 only) and then from screened random points.
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    let mut restarts_used = 0;
    'restarts: for restart in 0..config.restarts.max(1) {
        restarts_used += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        let mut spent = 0;
        let mut first = true;
        while spent < config.budget {
            let start = if first && restart == 0 {
                vec![0.0; count]
            } else {
                spent += SCREENED_STARTS;
                screened_start(&mut rng)
            };
            first = false;
            let optimizer = NelderMead {
                budget: config.budget.saturating_sub(spent).max(1),
                target: Some(target),
                f_tol: 1e-28,
                stall: Some((100 * count, 1e-3)),
                ..NelderMead::default()
            };
            let found = optimizer.minimize(objective, &start);
            spent += found.evaluations;
            let value = residual(&found.x);
            if best.as_ref().is_none_or(|(v, _)| value < *v) {
                best = Some((value, found.x));
            }
            if best.as_ref().is_some_and(|(v, _)| *v <= config.tol) {
                evaluations += spent;
                break 'restarts;
            }
        }
        evaluations += spent;
    }

    let (best_residual, params) = best.expect("at least one restart runs");
    let candidate = (best_residual <= config.tol).then(|| {
        let (generator, w) = unitary(&params);
        WCandidate {
            generator,
            w,
            residual: best_residual,
        }
    });
    WSearch {
        candidate,
        best_residual,
        restarts_used,
        evaluations,
    }
}

/// Joint measurement of the pair from the extensions `P` of `a` with
/// `U = w` and `Q` of `b` with `V = I`:
/// cell `(j1, j2) = Tr_A[(I ⊗ |0><0|) P(j1) Q(j2)]`.
pub fn joint_from_w(pair: &DichotomicPair, w: &ComplexMatrix, tol: f64) -> Result<JointPovm> {
    let residual = w_residual(pair, w)?;
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    let d = pair.dim();
    let check_tol = (100.0 * tol).max(1e-7);
    let p = dichotomic_extension(&pair.a, w, DEFAULT_TOL)?;
    let q = dichotomic_extension(&pair.b, &linalg::identity(d), DEFAULT_TOL)?;
    let mut norm = 0.0f64;
    let mut cells = Vec::with_capacity(4);
    for pj in p.projectors() {
        for qk in q.projectors() {
            norm = norm.max(linalg::commutator_norm(pj, qk));
            cells.push(linalg::hermitian_part(&linalg::ancilla_block(&(pj * qk), d, 2, 0, 0)));
        }
    }
    if norm > check_tol {
        return Err(Error::InconsistentCommutation { norm, tol: check_tol });
    }
    JointPovm::new(d, vec![2, 2], cells, check_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowVerdict {
    Compatible,
    Incompatible,
    Inconclusive,
    NotApplicable,
}

impl RowVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            RowVerdict::Compatible => "compatible",
            RowVerdict::Incompatible => "incompatible",
            RowVerdict::Inconclusive => "inconclusive",
            RowVerdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub w_search: RowVerdict,
    pub oracle: RowVerdict,
    pub closed_form: RowVerdict,
    /// Best W residual found.
    pub residual: f64,
    pub theta: Option<f64>,
    /// Why a method could not run at this point.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct RegionConfig {
    pub w_search: WSearchConfig,
    pub oracle: OracleConfig,
}

/// `n` evenly spaced values from 0 to 1 inclusive.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn point_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs W search, the feasibility oracle and, for orthogonal axes, the
/// closed form at every point. Rows come back sorted by `(λ1, λ2)` and do
/// not depend on scheduling.
///
/// For orthogonal axes other than x/y the closed-form angle refers to the
/// correspondingly rotated `W`; the region itself is rotation invariant.
pub fn region_scan(
    axis1: [f64; 3],
    axis2: [f64; 3],
    grid: &[(f64, f64)],
    config: &RegionConfig,
) -> Result<Vec<RegionRow>> {
    UnsharpSpin::new(axis1, 0.0)?;
    UnsharpSpin::new(axis2, 0.0)?;
    let dot: f64 = axis1.iter().zip(&axis2).map(|(a, b)| a * b).sum();
    let orthogonal = dot.abs() < 1e-12;

    let mut rows: Vec<RegionRow> = grid
        .par_iter()
        .enumerate()
        .map(|(index, &(lambda1, lambda2))| {
            let mut notes = Vec::new();
            let spins = UnsharpSpin::new(axis1, lambda1).and_then(|a| Ok((a, UnsharpSpin::new(axis2, lambda2)?)));
            let (first, second) = match spins {
                Ok(s) => s,
                Err(e) => {
                    return RegionRow {
                        lambda1,
                        lambda2,
                        w_search: RowVerdict::NotApplicable,
                        oracle: RowVerdict::NotApplicable,
                        closed_form: RowVerdict::NotApplicable,
                        residual: f64::NAN,
                        theta: None,
                        note: Some(e.to_string()),
                    }
                }
            };
            let pair = DichotomicPair::from_spins(&first, &second);
            let search = find_w(
                &pair,
                &WSearchConfig {
                    seed: point_seed(config.w_search.seed, index),
                    ..config.w_search.clone()
                },
            );
            let w_search = if search.candidate.is_some() {
                RowVerdict::Compatible
            } else {
                RowVerdict::Inconclusive
            };
            let oracle = match feasibility_oracle(&[first.povm(), second.povm()], &config.oracle) {
                Ok(r) => match r.status {
                    FeasibilityStatus::Feasible => RowVerdict::Compatible,
                    FeasibilityStatus::Infeasible => RowVerdict::Incompatible,
                    FeasibilityStatus::Inconclusive => RowVerdict::Inconclusive,
                },
                Err(e) => {
                    notes.push(format!("oracle: {e}"));
                    RowVerdict::Inconclusive
                }
            };
            let theta = if orthogonal {
                xy_closed_form_theta(lambda1, lambda2)
            } else {
                None
            };
            let closed_form = match (orthogonal, theta) {
                (false, _) => RowVerdict::NotApplicable,
                (true, Some(_)) => RowVerdict::Compatible,
                (true, None) => RowVerdict::Incompatible,
            };
            RegionRow {
                lambda1,
                lambda2,
                w_search,
                oracle,
                closed_form,
                residual: search.best_residual,
                theta,
                note: (!notes.is_empty()).then(|| notes.join("; ")),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.lambda1.total_cmp(&b.lambda1).then(a.lambda2.total_cmp(&b.lambda2)));
    Ok(rows)
}
