#![allow(dead_code)]

use naimark_lab::linalg::{self, ComplexMatrix, C64, DEFAULT_TOL};
use naimark_lab::measurements::{JointPovm, Povm, UnsharpSpin};
use rand::Rng;

pub fn spin(axis: [f64; 3], lambda: f64) -> Povm {
    UnsharpSpin::new(axis, lambda).unwrap().povm()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    linalg::hermitian_part(&random_matrix(rng, dim, dim))
}

pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, dim) * C64::from(3.0);
    linalg::unitary_from_generator(&h).unwrap()
}

/// Effects `S^{-1/2} G_m^† G_m S^{-1/2}` with `S = Σ G_m^† G_m`.
pub fn random_effects<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> Vec<ComplexMatrix> {
    let positives: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = random_matrix(rng, dim, dim);
            g.adjoint() * g
        })
        .collect();
    let total = positives.iter().fold(linalg::zeros(dim), |acc, p| acc + p);
    let inv = linalg::inverse_sqrt(&total, DEFAULT_TOL).unwrap();
    positives
        .iter()
        .map(|p| linalg::hermitian_part(&(&inv * p * &inv)))
        .collect()
}

pub fn random_povm<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    Povm::new(random_effects(rng, dim, outcomes), dim, 1e-10).unwrap()
}

pub fn random_joint<R: Rng>(rng: &mut R, dim: usize, shape: &[usize]) -> JointPovm {
    let cells: usize = shape.iter().product();
    JointPovm::new(dim, shape.to_vec(), random_effects(rng, dim, cells), 1e-10).unwrap()
}

pub fn random_axis<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// A unit vector orthogonal to `a`.
pub fn orthogonal_axis<R: Rng>(rng: &mut R, a: [f64; 3]) -> [f64; 3] {
    loop {
        let v = random_axis(rng);
        let dot: f64 = v.iter().zip(&a).map(|(x, y)| x * y).sum();
        let w = [v[0] - dot * a[0], v[1] - dot * a[1], v[2] - dot * a[2]];
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 {
            return [w[0] / n, w[1] / n, w[2] / n];
        }
    }
}
