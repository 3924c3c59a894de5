//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::hermitian::HermitianOperator;
use super::matrix::CMatrix;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 64;
/// Stop when the off-diagonal Frobenius norm is below this fraction of `‖A‖_F`.
pub const OFF_DIAGONAL_RTOL: f64 = 1e-13;

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors
/// (column `k` belongs to eigenvalue `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(values) U*`
    pub fn apply(&self, values: &[f64]) -> CMatrix {
        let n = self.dim();
        let u = &self.vectors;
        CMatrix::from_fn(n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &v) in values.iter().enumerate() {
                acc += u[(i, k)] * v * u[(j, k)].conj();
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(&self.eigenvalues)
    }

    /// Matrix of `K` in this eigenbasis, `U* K U`.
    pub fn to_eigenbasis(&self, k: &CMatrix) -> CMatrix {
        transfer(self, k, self)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// `U_left* K U_right`: the middle operator expressed between two eigenbases.
pub fn transfer(
    left: &SpectralDecomposition,
    k: &CMatrix,
    right: &SpectralDecomposition,
) -> CMatrix {
    let ku = k.matmul(&right.vectors);
    left.vectors.adjoint().matmul(&ku)
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes `a` with cyclic Jacobi sweeps of complex Givens rotations.
pub fn eigh(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = CMatrix::identity(n);
    let tol = OFF_DIAGONAL_RTOL * m.frobenius();

    let mut sweep = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= tol {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: sweep,
                off_norm: off,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweep += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    fix_phases(&mut vectors);
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
    })
}

fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Phase e^{-iφ} makes the (p, q) entry real, then a real rotation zeroes it.
    let dq = (apq / r).conj();
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta < 0.0 { -1.0 } else { 1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = dq * (-s);
    let jqq = dq * c;

    let n = m.dim();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// Rotates each column so its first entry of largest modulus is real positive.
fn fix_phases(u: &mut CMatrix) {
    let n = u.dim();
    for k in 0..n {
        let mut best = 0;
        let mut best_mod = -1.0;
        for i in 0..n {
            let a = u[(i, k)].norm();
            if a > best_mod {
                best_mod = a;
                best = i;
            }
        }
        if best_mod <= 0.0 {
            continue;
        }
        let phase = u[(best, k)].conj() / best_mod;
        for i in 0..n {
            u[(i, k)] *= phase;
        }
        u[(best, k)] = Complex64::new(u[(best, k)].re, 0.0);
    }
}
