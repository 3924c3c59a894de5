#![allow(dead_code)]

use num_complex::Complex64;
use shiftlab::matcore::{CMatrix, HermitianOperator};
use shiftlab::verify::rng::SplitMix64;

pub fn random_hermitian(rng: &mut SplitMix64, n: usize) -> HermitianOperator {
    let m = CMatrix::from_fn(n, |_, _| Complex64::new(rng.normal(), rng.normal()));
    HermitianOperator::new((&m + &m.adjoint()).scale(0.5)).unwrap()
}

pub fn random_pair(seed: u64, n: usize) -> (HermitianOperator, HermitianOperator) {
    let mut rng = SplitMix64::new(seed);
    let a = random_hermitian(&mut rng, n);
    let k = random_hermitian(&mut rng, n).scale(0.5);
    (a, k)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
