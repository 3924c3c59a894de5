//! Dense Hermitian linear algebra.

mod eigen;
mod hermitian;
mod io;
mod matrix;

pub use eigen::{eigh, transfer, SpectralDecomposition, MAX_SWEEPS, OFF_DIAGONAL_RTOL};
pub use hermitian::{HermitianOperator, HERMITIAN_RTOL};
pub use io::{MatrixFile, RealArray};
pub use matrix::CMatrix;

use crate::besov::SmoothFunction;
use crate::error::{Error, Result};

/// Schatten exponent `p ∈ [1, ∞]`; `∞` is the operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchattenIndex(f64);

impl SchattenIndex {
    pub const ONE: SchattenIndex = SchattenIndex(1.0);
    pub const TWO: SchattenIndex = SchattenIndex(2.0);
    pub const INFINITY: SchattenIndex = SchattenIndex(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidInput(format!(
                "Schatten index must be >= 1, got {p}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `f(A) = U f(Λ) U*`.
pub fn matfun(f: &SmoothFunction, a: &HermitianOperator) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    matfun_decomposed(f, &d)
}

pub fn matfun_decomposed(
    f: &SmoothFunction,
    d: &SpectralDecomposition,
) -> Result<HermitianOperator> {
    let values = d
        .eigenvalues
        .iter()
        .map(|&x| {
            let v = f.eval(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::FunctionEvaluation {
                    label: f.label().to_string(),
                    x,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    // U diag(v) U* is Hermitian up to rounding; symmetrize exactly.
    HermitianOperator::new(d.apply(&values))
}

/// Schatten p-norm; for Hermitian input the singular values are `|λ_i|`.
pub fn schatten(a: &HermitianOperator, p: SchattenIndex) -> Result<f64> {
    let d = eigh(a)?;
    Ok(schatten_from_eigenvalues(&d.eigenvalues, p))
}

pub fn schatten_from_eigenvalues(eigenvalues: &[f64], p: SchattenIndex) -> f64 {
    let s = eigenvalues.iter().map(|l| l.abs());
    if p.0.is_infinite() {
        s.fold(0.0, f64::max)
    } else if p.0 == 1.0 {
        s.sum()
    } else {
        s.map(|x| x.powf(p.0)).sum::<f64>().powf(1.0 / p.0)
    }
}

/// The perturbation path `A_t = A + tK`.
pub fn a_t(a: &HermitianOperator, k: &HermitianOperator, t: f64) -> Result<HermitianOperator> {
    a.add_scaled(k, t)
}

/// `A E_A([-j, j])`: eigenvalues with `|λ| > j` set to zero.
pub fn truncate_spectrum(a: &HermitianOperator, j: f64) -> Result<HermitianOperator> {
    let d = eigh(a)?;
    let values: Vec<f64> = d
        .eigenvalues
        .iter()
        .map(|&l| if l.abs() > j { 0.0 } else { l })
        .collect();
    HermitianOperator::new(d.apply(&values))
}
