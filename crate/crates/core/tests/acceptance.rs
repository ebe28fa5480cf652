//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use naimark_lab::compatibility::{
    feasibility_oracle, incompatibility_estimate, joint_povm_from_common_extension, pvms_pairwise_commute,
    EstimatorConfig, FeasibilityResult, FeasibilityStatus, OracleConfig, Verdict,
};
use naimark_lab::dichotomic::{self, RegionConfig, RowVerdict};
use naimark_lab::linalg::{self, basis_projector, identity, kron, matrix_unit, ComplexMatrix, C64, DEFAULT_TOL};
use naimark_lab::measurements::{unsharp_trio_joint, JointPovm, Povm, Pvm, AXIS_X, AXIS_Y, AXIS_Z};
use naimark_lab::naimark::{dichotomic_extension, general_extension, pvm_marginal, verify_extension, NaimarkExtension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{orthogonal_axis, random_axis, random_joint, random_povm, random_unitary, spin};

type Outcome = Result<String, String>;

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let elapsed = started.elapsed();
    if elapsed > limit {
        Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"))
    } else {
        Ok(format!("{detail}; {elapsed:.1?}"))
    }
}

fn witness_ok(povms: &[Povm], result: &FeasibilityResult) -> Result<(), String> {
    let joint = result.joint.as_ref().ok_or("feasible verdict without a witness")?;
    JointPovm::new(joint.dim(), joint.shape().to_vec(), joint.effects().to_vec(), 1e-7)
        .map_err(|e| format!("witness fails validation: {e}"))?;
    let targets: Vec<&[ComplexMatrix]> = povms.iter().map(Povm::effects).collect();
    let dev = joint.marginal_deviation(&targets).map_err(|e| e.to_string())?;
    if dev > 1e-7 {
        return Err(format!("witness marginal deviation {dev:e}"));
    }
    Ok(())
}

fn naimark_reconstruction() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for sample in 0..200 {
        let d = [2, 3, 4][sample % 3];
        let n = 2 + (sample / 3) % 5;
        let povm = random_povm(&mut rng, d, n);
        let general = general_extension(&povm, None, DEFAULT_TOL).map_err(|e| format!("sample {sample}: {e}"))?;
        let g = verify_extension(&general, &povm, 1e-9).map_err(|e| e.to_string())?;
        let binary = if n == 2 {
            povm.clone()
        } else {
            let first = povm.effect(0).clone();
            Povm::new(vec![first.clone(), identity(d) - first], d, 1e-10).map_err(|e| e.to_string())?
        };
        let u = random_unitary(&mut rng, d);
        let dich = dichotomic_extension(&binary, &u, DEFAULT_TOL).map_err(|e| format!("sample {sample}: {e}"))?;
        let r = verify_extension(&dich, &binary, 1e-9).map_err(|e| e.to_string())?;
        if !g.passed || !r.passed {
            return Err(format!(
                "sample {sample} (d={d}, n={n}): general {:e}, dichotomic {:e}",
                g.max_delta, r.max_delta
            ));
        }
        worst = worst.max(g.max_delta).max(r.max_delta);
    }
    within(
        Duration::from_secs(30),
        started,
        format!("200 samples, max delta {worst:.2e}"),
    )
}

fn trio_boundary(witnesses: &mut Vec<(Vec<Povm>, FeasibilityResult)>) -> Outcome {
    let started = Instant::now();
    let edge = 1.0 / 3f64.sqrt();
    let valid = |l: f64| unsharp_trio_joint(l, 0.0).map(|t| t.valid).unwrap_or(false);
    let (mut lo, mut hi) = (0.5, 0.6);
    if !valid(lo) || valid(hi) {
        return Err("validity flag does not bracket the boundary".into());
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if valid(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let flip = 0.5 * (lo + hi);
    if (flip - edge).abs() > 1e-9 {
        return Err(format!("validity flips at {flip}, expected {edge}"));
    }
    let config = OracleConfig::default();
    let mut verdicts = Vec::new();
    for (lambda, want) in [(0.50, true), (0.55, true), (0.60, false), (0.65, false)] {
        let povms = vec![spin(AXIS_X, lambda), spin(AXIS_Y, lambda), spin(AXIS_Z, lambda)];
        let r = feasibility_oracle(&povms, &config).map_err(|e| e.to_string())?;
        let got = match r.status {
            FeasibilityStatus::Feasible => true,
            FeasibilityStatus::Infeasible => false,
            FeasibilityStatus::Inconclusive => return Err(format!("oracle inconclusive at {lambda}")),
        };
        if got != want {
            return Err(format!("oracle says feasible={got} at {lambda}"));
        }
        verdicts.push(format!("{lambda}:{}", r.status.as_str()));
        if got {
            witnesses.push((povms, r));
        }
    }
    within(
        Duration::from_secs(60),
        started,
        format!("flip at {flip:.10}, oracle {}", verdicts.join(" ")),
    )
}

fn pair_region(witnesses: &mut Vec<(Vec<Povm>, FeasibilityResult)>) -> Outcome {
    let started = Instant::now();
    let values = dichotomic::unit_grid(21);
    let grid: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| (a, b)))
        .collect();
    let config = RegionConfig::default();
    let rows = dichotomic::region_scan(AXIS_X, AXIS_Y, &grid, &config).map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut worst_inside = 0.0f64;
    for row in &rows {
        let margin = 1.0 - row.lambda1 * row.lambda1 - row.lambda2 * row.lambda2;
        if row.closed_form == RowVerdict::Compatible {
            if row.residual > 1e-6 || row.w_search != RowVerdict::Compatible {
                return Err(format!(
                    "({}, {}): closed form compatible but W residual {:e}",
                    row.lambda1, row.lambda2, row.residual
                ));
            }
            worst_inside = worst_inside.max(row.residual);
        }
        if margin.abs() < 0.02 {
            continue;
        }
        checked += 1;
        let inside = margin > 0.0;
        let expect = if inside {
            RowVerdict::Compatible
        } else {
            RowVerdict::Incompatible
        };
        let w_expect = if inside {
            RowVerdict::Compatible
        } else {
            RowVerdict::Inconclusive
        };
        if row.closed_form != expect || row.oracle != expect || row.w_search != w_expect {
            return Err(format!(
                "({}, {}): closed form {}, oracle {}, W search {}",
                row.lambda1,
                row.lambda2,
                row.closed_form.as_str(),
                row.oracle.as_str(),
                row.w_search.as_str()
            ));
        }
    }
    for &(l1, l2) in grid.iter().step_by(5) {
        let povms = vec![spin(AXIS_X, l1), spin(AXIS_Y, l2)];
        let r = feasibility_oracle(&povms, &OracleConfig::default()).map_err(|e| e.to_string())?;
        if r.feasible() {
            witnesses.push((povms, r));
        }
    }
    within(
        Duration::from_secs(300),
        started,
        format!(
            "{} rows, {checked} outside the band agree, max W residual inside {worst_inside:.1e}",
            rows.len()
        ),
    )
}

fn common_extension_round_trip() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_norm, mut worst_delta) = (0.0f64, 0.0f64);
    for sample in 0..50 {
        let d = 2 + sample % 2;
        let shape = vec![2 + rng.gen_range(0..2), 2 + rng.gen_range(0..2)];
        let joint = random_joint(&mut rng, d, &shape);
        let ext = general_extension(&joint.to_povm(), None, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let grid = JointPovm::from_povm(ext.pvm().as_povm().clone(), shape.clone()).map_err(|e| e.to_string())?;
        let marginals = (0..2)
            .map(|axis| pvm_marginal(&grid, axis, 1e-9))
            .collect::<Result<Vec<Pvm>, _>>()
            .map_err(|e| format!("sample {sample}: {e}"))?;
        let commute = pvms_pairwise_commute(&marginals, 1e-8).map_err(|e| e.to_string())?;
        if !commute.commute {
            return Err(format!("sample {sample}: marginal commutator {:e}", commute.max_norm));
        }
        worst_norm = worst_norm.max(commute.max_norm);
        let anc = ext.anc_dim();
        let exts = marginals
            .iter()
            .map(|m| NaimarkExtension::new(d, anc, basis_projector(anc, 0), m.projectors().to_vec(), 1e-9))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("sample {sample}: {e}"))?;
        let report = joint_povm_from_common_extension(&exts, 1e-8).map_err(|e| e.to_string())?;
        if report.verdict != Verdict::CompatibleCertified {
            return Err(format!("sample {sample}: verdict {}", report.verdict));
        }
        let witness = report.witness.as_ref().ok_or("certified without witness")?;
        let m0 = joint.marginal(0, 1e-9).map_err(|e| e.to_string())?;
        let m1 = joint.marginal(1, 1e-9).map_err(|e| e.to_string())?;
        let delta = witness
            .marginal_deviation(&[m0.effects(), m1.effects()])
            .map_err(|e| e.to_string())?
            .max(report.marginal_deltas.iter().copied().fold(0.0, f64::max));
        if delta > 1e-8 {
            return Err(format!("sample {sample}: marginal delta {delta:e}"));
        }
        worst_delta = worst_delta.max(delta);
    }
    within(
        Duration::from_secs(60),
        started,
        format!("50 pairs, max commutator {worst_norm:.1e}, max marginal delta {worst_delta:.1e}"),
    )
}

/// `[P(1), Q(1)]` with both blocks written out by hand, plus-sign form.
fn block_commutator_norm(lambda: f64) -> f64 {
    let x = (1.0 - lambda * lambda).sqrt() / 2.0;
    let half = C64::from(0.5);
    let a1 = (identity(2) + linalg::sigma_x() * C64::from(lambda)) * half;
    let a2 = (identity(2) - linalg::sigma_x() * C64::from(lambda)) * half;
    let b1 = (identity(2) + linalg::sigma_y() * C64::from(lambda)) * half;
    let b2 = (identity(2) - linalg::sigma_y() * C64::from(lambda)) * half;
    let off = identity(2) * C64::from(x);
    let build = |e1: &ComplexMatrix, e2: &ComplexMatrix| {
        kron(e1, &matrix_unit(2, 0, 0))
            + kron(&off, &matrix_unit(2, 0, 1))
            + kron(&off, &matrix_unit(2, 1, 0))
            + kron(e2, &matrix_unit(2, 1, 1))
    };
    let p = build(&a1, &a2);
    let q = build(&b1, &b2);
    (&p * &q - &q * &p).norm()
}

fn example_reproduction() -> Outcome {
    let started = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_naimark-lab"))
        .args(["examples", "--which", "all"])
        .output()
        .map_err(|e| format!("cannot run the binary: {e}"))?;
    if !output.status.success() {
        return Err(format!(
            "examples exited with {:?}:\n{}",
            output.status.code(),
            String::from_utf8_lossy(&output.stdout)
        ));
    }
    let mut worst = 0.0f64;
    for step in 1..=10 {
        let lambda = step as f64 / 10.0;
        let flip = -identity(2);
        let p = dichotomic_extension(&spin(AXIS_X, lambda), &flip, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let q = dichotomic_extension(&spin(AXIS_Y, lambda), &flip, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let built = (&p.projectors()[0] * &q.projectors()[0] - &q.projectors()[0] * &p.projectors()[0]).norm();
        let by_hand = block_commutator_norm(lambda);
        let formula = (2.0 * lambda * lambda - lambda.powi(4)).sqrt();
        let err = (built - by_hand).abs().max((built - formula).abs());
        if err > 1e-10 || built <= 0.0 {
            return Err(format!(
                "lambda {lambda}: norm {built}, blocks {by_hand}, formula {formula}"
            ));
        }
        worst = worst.max(err);
    }
    let lambda = FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    let ext = |axis, u: ComplexMatrix| dichotomic_extension(&spin(axis, lambda), &u, DEFAULT_TOL).unwrap();
    let q1 = ext(AXIS_X, identity(2));
    let q2 = ext(AXIS_Y, -(linalg::sigma_z() * i));
    let q3 = ext(AXIS_Z, linalg::sigma_y() * i);
    let q2b = ext(AXIS_Y, identity(2));
    let q3b = ext(AXIS_Z, -(linalg::sigma_x() * i));
    let c = |a: &NaimarkExtension, b: &NaimarkExtension| {
        (&a.projectors()[0] * &b.projectors()[0] - &b.projectors()[0] * &a.projectors()[0]).norm()
    };
    let pattern = [c(&q1, &q2), c(&q1, &q3), c(&q2, &q3), c(&q2b, &q3b)];
    if pattern[0] > 1e-12 || pattern[1] > 1e-12 || pattern[2] < 1e-3 || pattern[3] > 1e-12 {
        return Err(format!("commutator pattern {pattern:?}"));
    }
    within(
        Duration::from_secs(10),
        started,
        format!(
            "examples exit 0, Example 3 max error {worst:.1e}, pattern {:.3}",
            pattern[2]
        ),
    )
}

fn g_estimator() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let config = EstimatorConfig::default();
    let mut worst = 0.0f64;
    for sample in 0..20 {
        let (l1, l2) = loop {
            let l1: f64 = rng.gen_range(0.05..1.0);
            let l2: f64 = rng.gen_range(0.05..1.0);
            if l1 * l1 + l2 * l2 <= 0.98 {
                break (l1, l2);
            }
        };
        let a = random_axis(&mut rng);
        let b = orthogonal_axis(&mut rng, a);
        let povms = [spin(a, l1), spin(b, l2)];
        let est = incompatibility_estimate(
            &povms,
            &EstimatorConfig {
                seed: sample,
                ..config.clone()
            },
        )
        .map_err(|e| e.to_string())?;
        if est.value > 1e-6 {
            return Err(format!("sample {sample} (l1={l1:.3}, l2={l2:.3}): g = {:e}", est.value));
        }
        worst = worst.max(est.value);
    }
    let sharp = [spin(AXIS_X, 1.0), spin(AXIS_Z, 1.0)];
    let sharp_g = incompatibility_estimate(&sharp, &config)
        .map_err(|e| e.to_string())?
        .value;
    if sharp_g <= 1e-3 {
        return Err(format!("sharp x/z estimate {sharp_g:e}"));
    }
    let mut monotone = Vec::new();
    for povms in [sharp.to_vec(), vec![spin(AXIS_X, 0.9), spin(AXIS_Y, 0.9)]] {
        for restarts in [1, 2, 4] {
            let small = EstimatorConfig {
                restarts,
                budget: 2000,
                seed: 11,
                ..config.clone()
            };
            let large = EstimatorConfig {
                restarts: 2 * restarts,
                ..small.clone()
            };
            let g1 = incompatibility_estimate(&povms, &small)
                .map_err(|e| e.to_string())?
                .value;
            let g2 = incompatibility_estimate(&povms, &large)
                .map_err(|e| e.to_string())?
                .value;
            if g2 > g1 {
                return Err(format!(
                    "g rose from {g1:e} to {g2:e} when restarts doubled from {restarts}"
                ));
            }
            monotone.push(g2);
        }
    }
    within(
        Duration::from_secs(300),
        started,
        format!("20 compatible pairs max g {worst:.1e}; sharp x/z estimate {sharp_g:.3}; doubling never increased g"),
    )
}

fn oracle_witnesses(witnesses: &[(Vec<Povm>, FeasibilityResult)]) -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut extra = Vec::new();
    for _ in 0..10 {
        let d = rng.gen_range(2..4);
        let shape = [rng.gen_range(2..4), rng.gen_range(2..4)];
        let joint = random_joint(&mut rng, d, &shape);
        let povms = vec![joint.marginal(0, 1e-9).unwrap(), joint.marginal(1, 1e-9).unwrap()];
        let r = feasibility_oracle(&povms, &OracleConfig::default()).map_err(|e| e.to_string())?;
        if !r.feasible() {
            return Err(format!("marginals of a joint judged {}", r.status.as_str()));
        }
        extra.push((povms, r));
    }
    let all: Vec<&(Vec<Povm>, FeasibilityResult)> = witnesses.iter().chain(extra.iter()).collect();
    for (index, (povms, result)) in all.iter().enumerate() {
        witness_ok(povms, result).map_err(|e| format!("witness {index}: {e}"))?;
    }
    within(
        Duration::from_secs(120),
        started,
        format!("{} feasible witnesses valid at 1e-7", all.len()),
    )
}

fn main() -> ExitCode {
    let mut witnesses = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 Naimark reconstruction", naimark_reconstruction()),
        ("2 Trio boundary", trio_boundary(&mut witnesses)),
        ("3 Pair region", pair_region(&mut witnesses)),
        ("4 Common extension round trip", common_extension_round_trip()),
        ("5 Example reproduction", example_reproduction()),
        ("6 g-estimator soundness", g_estimator()),
        ("7 Oracle witness validity", oracle_witnesses(&witnesses)),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", results.len());
        ExitCode::FAILURE
    }
}
