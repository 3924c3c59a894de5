use num_complex::Complex64;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Relative tolerance on `max|A - A*|` (scaled by `max|a_ij|`).
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// A dense complex self-adjoint matrix.
///
/// Construction symmetrizes inputs whose asymmetry is within tolerance, so the
/// stored entries are exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::InvalidInput(
                "operator dimension must be at least 1".into(),
            ));
        }
        if matrix
            .as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput(
                "operator has non-finite entries".into(),
            ));
        }
        let tolerance = HERMITIAN_RTOL * matrix.max_abs();
        let max_asymmetry = matrix.max_asymmetry();
        if max_asymmetry > tolerance {
            return Err(Error::NotHermitian {
                max_asymmetry,
                tolerance,
            });
        }
        let n = matrix.dim();
        let sym = CMatrix::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(matrix[(i, i)].re, 0.0)
            } else {
                (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5
            }
        });
        Ok(Self { matrix: sym })
    }

    /// Wraps a matrix known to be exactly Hermitian.
    pub(crate) fn from_exact(matrix: CMatrix) -> Self {
        debug_assert!(matrix.max_asymmetry() == 0.0);
        Self { matrix }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_exact(CMatrix::from_real_diag(diag))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_exact(CMatrix::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_exact(self.matrix.scale(c))
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Entrywise `self + t * other`.
    pub fn add_scaled(&self, other: &HermitianOperator, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let n = self.dim();
        let m = CMatrix::from_fn(n, |i, j| self.matrix[(i, j)] + other.matrix[(i, j)] * t);
        Ok(Self::from_exact(m))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.max_abs() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian_with_asymmetry() {
        let m = CMatrix::from_parts(2, &[1.0, 2.0, 0.0, 1.0], None).unwrap();
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { max_asymmetry, .. }) => assert_eq!(max_asymmetry, 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetrizes_round_trip_noise() {
        let m = CMatrix::from_parts(
            2,
            &[1.0, 2.0, 2.0 + 1e-15, 1.0],
            Some(&[1e-16, 0.5, -0.5, 0.0]),
        )
        .unwrap();
        let h = HermitianOperator::new(m).unwrap();
        assert_eq!(h.matrix().max_asymmetry(), 0.0);
        assert_eq!(h.matrix()[(0, 0)].im, 0.0);
    }

    #[test]
    fn rejects_empty() {
        assert!(HermitianOperator::new(CMatrix::zeros(0)).is_err());
    }
}
