use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_common_dim;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::measurements::Povm;
use crate::naimark::{build_isometric_extension, ExtensionChoice};
use crate::optim::NelderMead;

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub budget: usize,
    pub seed: u64,
    /// Values at or below this certify compatibility and stop the search.
    pub tol: f64,
    /// Ancilla dimension shared by all extensions; defaults to the largest
    /// outcome count.
    pub anc_dim: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            restarts: 8,
            budget: 5000,
            seed: 0,
            tol: 1e-6,
            anc_dim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibilityEstimate {
    /// Smallest aggregate commutator norm found.
    pub value: f64,
    /// False when the best restart ran out of budget without settling.
    pub converged: bool,
    /// Best value of each restart that ran.
    pub per_restart: Vec<f64>,
    pub evaluations: usize,
    pub anc_dim: usize,
}

impl IncompatibilityEstimate {
    pub fn certifies_compatibility(&self, tol: f64) -> bool {
        self.value <= tol
    }
}

struct Family {
    povms: Vec<Povm>,
    outcomes: Vec<usize>,
    rotation_dim: usize,
    block: usize,
}

impl Family {
    fn param_count(&self) -> usize {
        self.block * (self.povms.len() - 1)
    }

    /// Aggregate `Σ_{i<l} Σ_{j,k} ‖[P_i(j), P_l(k)]‖_F` over the real
    /// (unpadded) outcomes. The first extension carries no rotation.
    fn objective(&self, params: &[f64]) -> f64 {
        let mut projectors: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(self.povms.len());
        for (i, povm) in self.povms.iter().enumerate() {
            let rotation = (i > 0).then(|| {
                let chunk = &params[(i - 1) * self.block..i * self.block];
                let h = linalg::hermitian_from_params(self.rotation_dim, chunk);
                linalg::unitary_from_generator(&h).expect("generator is Hermitian by construction")
            });
            let choice = ExtensionChoice {
                unitaries: None,
                completion: rotation.as_ref(),
            };
            match build_isometric_extension(povm, &choice, linalg::DEFAULT_TOL) {
                Ok(ext) => projectors.push(ext.projectors()[..self.outcomes[i]].to_vec()),
                Err(_) => return f64::INFINITY,
            }
        }
        let mut total = 0.0;
        for i in 0..projectors.len() {
            for l in i + 1..projectors.len() {
                for p in &projectors[i] {
                    for q in &projectors[l] {
                        total += linalg::commutator_norm(p, q);
                    }
                }
            }
        }
        total
    }
}

/// Upper estimate of the smallest aggregate commutator norm over a family of
/// extensions sharing one ancilla dimension and the state `|0><0|`.
///
/// The family varies the unitary freedom on the orthogonal complement of
/// each isometry; per-outcome unitaries on the isometry itself only relabel
/// the same projectors. A value at or below `tol` certifies compatibility;
/// a positive value is an estimate, not a proof of incompatibility.
pub fn incompatibility_estimate(povms: &[Povm], config: &EstimatorConfig) -> Result<IncompatibilityEstimate> {
    let dim = check_common_dim(povms.iter().map(Povm::dim))?;
    let outcomes: Vec<usize> = povms.iter().map(Povm::len).collect();
    let largest = outcomes.iter().copied().max().unwrap_or(1);
    let anc_dim = config.anc_dim.unwrap_or(largest);
    if anc_dim < largest {
        return Err(Error::InvalidParameter(format!(
            "ancilla dimension {anc_dim} is below the largest outcome count {largest}"
        )));
    }
    if povms.len() < 2 {
        return Ok(IncompatibilityEstimate {
            value: 0.0,
            converged: true,
            per_restart: Vec::new(),
            evaluations: 0,
            anc_dim,
        });
    }
    let rotation_dim = (anc_dim - 1) * dim;
    let family = Family {
        povms: povms.iter().map(|p| p.padded(anc_dim)).collect(),
        outcomes,
        rotation_dim,
        block: linalg::hermitian_param_count(rotation_dim),
    };

    let optimizer = NelderMead {
        budget: config.budget,
        target: Some(config.tol),
        ..NelderMead::default()
    };
    let count = family.param_count();
    let mut per_restart = Vec::with_capacity(config.restarts);
    let mut evaluations = 0;
    let mut best = (f64::INFINITY, false);
    for restart in 0..config.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            vec![0.0; count]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(restart as u64);
            (0..count)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        };
        let found = optimizer.minimize(|p| family.objective(p), &start);
        evaluations += found.evaluations;
        per_restart.push(found.value);
        if found.value < best.0 {
            best = (found.value, found.converged);
        }
        if best.0 <= config.tol {
            break;
        }
    }
    Ok(IncompatibilityEstimate {
        value: best.0,
        converged: best.1 || best.0 <= config.tol,
        per_restart,
        evaluations,
        anc_dim,
    })
}
