//! Derivative-free minimization by the Nelder–Mead simplex method.

/// Dimension-adaptive coefficients (they reduce to the classic 1, 2, 0.5,
/// 0.5 in two dimensions). When the simplex collapses before the budget is
/// spent, it is rebuilt around the best point and the search continues until
/// a rebuild brings no improvement.
#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Stop as soon as a value at or below this is seen.
    pub target: Option<f64>,
    /// Edge length of the initial simplex.
    pub step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    /// Give up when `window` evaluations improve the best value by less
    /// than the given fraction of it.
    pub stall: Option<(usize, f64)>,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            budget: 5000,
            target: None,
            step: 0.5,
            f_tol: 1e-14,
            x_tol: 1e-12,
            stall: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// False when the budget ran out before the simplex settled or the
    /// target was reached.
    pub converged: bool,
}

struct Counter<F> {
    f: F,
    evaluations: usize,
    best: (f64, Vec<f64>),
    checkpoint: (usize, f64),
    stalled: bool,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best.0 {
            self.best = (v, x.to_vec());
        }
        v
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let mut counter = Counter {
            f,
            evaluations: 0,
            best: (f64::INFINITY, x0.to_vec()),
            checkpoint: (0, f64::INFINITY),
            stalled: false,
        };
        let v0 = counter.eval(x0);
        if x0.is_empty() || self.reached(v0) {
            return Minimum {
                x: x0.to_vec(),
                value: v0,
                evaluations: counter.evaluations,
                converged: true,
            };
        }
        let converged;
        loop {
            let before = counter.best.0;
            let start = counter.best.1.clone();
            let settled = self.run(&mut counter, &start);
            if !settled || self.reached(counter.best.0) {
                converged = self.reached(counter.best.0);
                break;
            }
            if counter.best.0 >= before {
                converged = true;
                break;
            }
        }
        Minimum {
            x: counter.best.1,
            value: counter.best.0,
            evaluations: counter.evaluations,
            converged,
        }
    }

    fn reached(&self, v: f64) -> bool {
        self.target.is_some_and(|t| v <= t)
    }

    fn exhausted<F>(&self, counter: &mut Counter<F>) -> bool {
        if let Some((window, fraction)) = self.stall {
            let (at, value) = counter.checkpoint;
            if counter.evaluations >= at + window.max(1) {
                let best = counter.best.0;
                if value.is_finite() && value - best <= fraction * best.abs() {
                    counter.stalled = true;
                }
                counter.checkpoint = (counter.evaluations, best);
            }
        }
        counter.stalled || counter.evaluations >= self.budget
    }

    /// One simplex search from `start`; returns true when the simplex
    /// settled (or the target was hit) within the budget.
    fn run<F: FnMut(&[f64]) -> f64>(&self, counter: &mut Counter<F>, start: &[f64]) -> bool {
        let n = start.len();
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = counter.eval(start);
        simplex.push((start.to_vec(), f0));
        for i in 0..n {
            if self.exhausted(counter) {
                return false;
            }
            let mut x = start.to_vec();
            x[i] += self.step;
            let v = counter.eval(&x);
            simplex.push((x, v));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if self.reached(simplex[0].1) {
                return true;
            }
            let f_spread = simplex[n].1 - simplex[0].1;
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if f_spread <= self.f_tol && x_spread <= self.x_tol {
                return true;
            }
            if self.exhausted(counter) {
                return false;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / nf)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = counter.eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(alpha * gamma);
                let fe = counter.eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(alpha * rho);
                let fc = counter.eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = counter.eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                if self.exhausted(counter) {
                    return false;
                }
                let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, x)| b + sigma * (x - b)).collect();
                let v = counter.eval(&x);
                *entry = (x, v);
            }
        }
    }
}
