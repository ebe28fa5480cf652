//! Numerical reconstructions of the worked examples, each with the
//! conclusions it is expected to reach.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::compatibility::{joint_povm_from_common_extension, pvms_pairwise_commute};
use crate::error::{Error, Result};
use crate::linalg::{self, basis_projector, identity, outer, ComplexMatrix, C64, DEFAULT_TOL, I};
use crate::measurements::{unsharp_trio_joint, JointPovm, Povm, Pvm, UnsharpSpin, AXIS_X, AXIS_Y, AXIS_Z};
use crate::naimark::{dichotomic_extension, general_extension, pvm_marginal, verify_extension, NaimarkExtension};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub description: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
}

impl Check {
    fn new(
        description: impl Into<String>,
        expected: impl Into<String>,
        computed: impl Into<String>,
        passed: bool,
    ) -> Self {
        Check {
            description: description.into(),
            expected: expected.into(),
            computed: computed.into(),
            passed,
        }
    }

    fn at_most(description: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(
            description,
            format!("<= {bound:e}"),
            format!("{value:e}"),
            value <= bound,
        )
    }

    fn above(description: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(description, format!("> {bound:e}"), format!("{value:e}"), value > bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleOutcome {
    pub number: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl ExampleOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_example(number: u8) -> Result<ExampleOutcome> {
    match number {
        1 => example_one(),
        2 => example_two(),
        3 => example_three(),
        4 => example_four(),
        other => Err(Error::InvalidParameter(format!("no example {other}"))),
    }
}

fn spin(axis: [f64; 3], lambda: f64) -> Povm {
    UnsharpSpin::new(axis, lambda).expect("fixed example parameters").povm()
}

fn ket(entries: &[f64]) -> ComplexMatrix {
    outer(&entries.iter().map(|&v| C64::from(v)).collect::<Vec<_>>())
}

/// One projective extension that reproduces two different measurements
/// depending on the ancilla state.
fn example_one() -> Result<ExampleOutcome> {
    let h = FRAC_1_SQRT_2;
    let p = ket(&[1.0, 0.0, 0.0, 0.0]) + ket(&[0.0, h, 0.0, h]);
    let projectors = vec![p.clone(), identity(4) - &p];
    let computational = Povm::new(vec![basis_projector(2, 0), basis_projector(2, 1)], 2, DEFAULT_TOL)?;
    let diagonal = Povm::new(vec![ket(&[h, h]), ket(&[h, -h])], 2, DEFAULT_TOL)?;

    let ext0 = NaimarkExtension::new(2, 2, basis_projector(2, 0), projectors.clone(), DEFAULT_TOL)?;
    let ext1 = NaimarkExtension::new(2, 2, basis_projector(2, 1), projectors, DEFAULT_TOL)?;
    let r0 = verify_extension(&ext0, &computational, 1e-12)?;
    let r1 = verify_extension(&ext1, &diagonal, 1e-12)?;
    let mismatch = joint_povm_from_common_extension(&[ext0, ext1], DEFAULT_TOL);
    Ok(ExampleOutcome {
        number: 1,
        title: "one extension, two ancilla states",
        checks: vec![
            Check::at_most("ancilla |0><0| reproduces {|0><0|, |1><1|}", r0.max_delta, 1e-12),
            Check::at_most("ancilla |1><1| reproduces {|+><+|, |-><-|}", r1.max_delta, 1e-12),
            Check::new(
                "extensions with different ancilla states are refused",
                "ancilla state mismatch",
                match &mismatch {
                    Err(e) => e.to_string(),
                    Ok(r) => format!("verdict {}", r.verdict),
                },
                matches!(mismatch, Err(Error::AncillaStateMismatch { .. })),
            ),
        ],
    })
}

/// The joint of three unsharp spins and the commuting marginals of its
/// extension.
fn example_two() -> Result<ExampleOutcome> {
    let lambda = 0.5;
    let trio = unsharp_trio_joint(lambda, DEFAULT_TOL)?;
    let mut checks = vec![Check::new(
        "trio joint at 0.5 is a valid POVM",
        "valid",
        if trio.valid { "valid" } else { "invalid" },
        trio.valid,
    )];
    let beyond = unsharp_trio_joint(0.6, 0.0)?;
    checks.push(Check::new(
        "trio joint at 0.6 has a negative effect",
        "invalid",
        format!("min eigenvalue {:e}", beyond.min_eigenvalue()),
        !beyond.valid,
    ));

    let joint = trio.joint(DEFAULT_TOL)?;
    let ext = general_extension(&joint.to_povm(), None, DEFAULT_TOL)?;
    checks.push(Check::new(
        "extension acts on system x 8-dimensional ancilla",
        "16x16 projectors",
        format!("{0}x{0} projectors", ext.sys_dim() * ext.anc_dim()),
        ext.anc_dim() == 8,
    ));
    let grid = JointPovm::from_povm(ext.pvm().as_povm().clone(), vec![2, 2, 2])?;
    let marginals = (0..3)
        .map(|axis| pvm_marginal(&grid, axis, DEFAULT_TOL))
        .collect::<Result<Vec<Pvm>>>()?;
    let report = pvms_pairwise_commute(&marginals, 1e-9)?;
    checks.push(Check::at_most("marginal PVMs pairwise commute", report.max_norm, 1e-9));
    for (axis, (n, label)) in [(AXIS_X, "x"), (AXIS_Y, "y"), (AXIS_Z, "z")].into_iter().enumerate() {
        let ext_i = NaimarkExtension::new(
            2,
            8,
            basis_projector(8, 0),
            marginals[axis].projectors().to_vec(),
            DEFAULT_TOL,
        )?;
        let r = verify_extension(&ext_i, &spin(n, lambda), 1e-9)?;
        checks.push(Check::at_most(
            format!("marginal {label} extends the unsharp {label} spin"),
            r.max_delta,
            1e-9,
        ));
    }
    Ok(ExampleOutcome {
        number: 2,
        title: "three unsharp spins with a joint measurement",
        checks,
    })
}

/// Extensions of compatible unsharp x and y spins that do not commute.
fn example_three() -> Result<ExampleOutcome> {
    let mut checks = Vec::new();
    let flip = -identity(2);
    for step in 1..=10 {
        let lambda = step as f64 / 10.0;
        let p = dichotomic_extension(&spin(AXIS_X, lambda), &flip, DEFAULT_TOL)?;
        let q = dichotomic_extension(&spin(AXIS_Y, lambda), &flip, DEFAULT_TOL)?;
        let norm = linalg::commutator_norm(&p.projectors()[0], &q.projectors()[0]);
        let expected = (2.0 * lambda * lambda - lambda.powi(4)).sqrt();
        checks.push(Check::new(
            format!("lambda {lambda}: |[P(1), Q(1)]|_F is nonzero and equals sqrt(2 l^2 - l^4)"),
            format!("{expected:.12}"),
            format!("{norm:.12}"),
            norm > 0.0 && (norm - expected).abs() <= 1e-10,
        ));
    }
    Ok(ExampleOutcome {
        number: 3,
        title: "non-commuting extensions of a compatible pair",
        checks,
    })
}

/// Pairwise compatible spins at 1/sqrt(2): each pair has commuting
/// extensions, but not all with one choice.
fn example_four() -> Result<ExampleOutcome> {
    let lambda = FRAC_1_SQRT_2;
    let (a1, a2, a3) = (spin(AXIS_X, lambda), spin(AXIS_Y, lambda), spin(AXIS_Z, lambda));
    let sigma_z = linalg::sigma_z();
    let q1 = dichotomic_extension(&a1, &identity(2), DEFAULT_TOL)?;
    let q2 = dichotomic_extension(&a2, &(-(&sigma_z * I)), DEFAULT_TOL)?;
    let q3 = dichotomic_extension(&a3, &(linalg::sigma_y() * I), DEFAULT_TOL)?;
    let q2b = dichotomic_extension(&a2, &identity(2), DEFAULT_TOL)?;
    let q3b = dichotomic_extension(&a3, &(-(linalg::sigma_x() * I)), DEFAULT_TOL)?;
    let norm =
        |p: &NaimarkExtension, q: &NaimarkExtension| linalg::commutator_norm(&p.projectors()[0], &q.projectors()[0]);

    let x2 = linalg::psd_sqrt(&(a2.effect(0) * a2.effect(1)), DEFAULT_TOL)?;
    let printed = -(&x2 * &sigma_z) * I;
    let block = linalg::ancilla_block(&q2.projectors()[0], 2, 2, 0, 1);
    Ok(ExampleOutcome {
        number: 4,
        title: "pairwise compatible, jointly incompatible spins",
        checks: vec![
            Check::at_most(
                "Q2(1) carries -i sqrt(A2(1) A2(2)) sigma_z in its upper off-diagonal block",
                linalg::max_abs_diff(&block, &printed),
                1e-12,
            ),
            Check::at_most("[Q1(1), Q2(1)] = 0", norm(&q1, &q2), 1e-12),
            Check::at_most("[Q1(1), Q3(1)] = 0", norm(&q1, &q3), 1e-12),
            Check::above("[Q2(1), Q3(1)] != 0", norm(&q2, &q3), 1e-3),
            Check::at_most("[Q2'(1), Q3'(1)] = 0", norm(&q2b, &q3b), 1e-12),
        ],
    })
}
