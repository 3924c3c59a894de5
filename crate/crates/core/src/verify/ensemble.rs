use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use crate::error::Result;
use crate::matcore::{eigh, CMatrix, HermitianOperator};

/// Distribution of the random `(A, K)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Independent standard normal real and imaginary parts, symmetrized.
    #[default]
    GaussianHermitian,
    /// Real diagonal matrices with standard normal entries.
    Diagonal,
    /// A common random eigenbasis with independent normal spectra.
    CommutingPair,
    /// Gaussian `A`; `K` keeps only its `r` largest singular directions.
    LowRank(usize),
    /// Gaussian `A` and `K = 0`.
    Zero,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::GaussianHermitian => write!(f, "gaussian_hermitian"),
            Ensemble::Diagonal => write!(f, "diagonal"),
            Ensemble::CommutingPair => write!(f, "commuting_pair"),
            Ensemble::LowRank(r) => write!(f, "low_rank({r})"),
            Ensemble::Zero => write!(f, "zero"),
        }
    }
}

/// A drawn pair; for jointly diagonal ensembles also the spectra `α`, `λ`
/// paired by common eigenvector.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: HermitianOperator,
    pub k: HermitianOperator,
    pub joint_spectra: Option<(Vec<f64>, Vec<f64>)>,
}

fn gaussian_hermitian(rng: &mut SplitMix64, n: usize) -> HermitianOperator {
    let g = CMatrix::from_fn(n, |_, _| {
        let re = rng.normal();
        let im = rng.normal();
        Complex64::new(re, im)
    });
    HermitianOperator::new((&g + &g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

fn normals(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

/// Deterministic draw for `(seed, dim)`.
pub fn draw(seed: u64, dim: usize, ensemble: Ensemble) -> Result<Instance> {
    let mut rng = SplitMix64::stream(seed, dim as u64);
    let n = dim;
    Ok(match ensemble {
        Ensemble::GaussianHermitian => {
            let a = gaussian_hermitian(&mut rng, n);
            let k = gaussian_hermitian(&mut rng, n);
            Instance {
                a,
                k,
                joint_spectra: None,
            }
        }
        Ensemble::Diagonal => {
            let alpha = normals(&mut rng, n);
            let lambda = normals(&mut rng, n);
            Instance {
                a: HermitianOperator::from_real_diag(&alpha),
                k: HermitianOperator::from_real_diag(&lambda),
                joint_spectra: Some((alpha, lambda)),
            }
        }
        Ensemble::CommutingPair => {
            let basis = eigh(&gaussian_hermitian(&mut rng, n))?;
            let alpha = normals(&mut rng, n);
            let lambda = normals(&mut rng, n);
            Instance {
                a: HermitianOperator::new(basis.apply(&alpha))?,
                k: HermitianOperator::new(basis.apply(&lambda))?,
                joint_spectra: Some((alpha, lambda)),
            }
        }
        Ensemble::LowRank(r) => {
            let a = gaussian_hermitian(&mut rng, n);
            let full = eigh(&gaussian_hermitian(&mut rng, n))?;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| {
                full.eigenvalues[j]
                    .abs()
                    .total_cmp(&full.eigenvalues[i].abs())
                    .then(i.cmp(&j))
            });
            let mut kept = vec![0.0; n];
            for &i in order.iter().take(r) {
                kept[i] = full.eigenvalues[i];
            }
            Instance {
                a,
                k: HermitianOperator::new(full.apply(&kept))?,
                joint_spectra: None,
            }
        }
        Ensemble::Zero => Instance {
            a: gaussian_hermitian(&mut rng, n),
            k: HermitianOperator::zeros(n),
            joint_spectra: None,
        },
    })
}

/// `(A, K)` for `(seed, dim)`; identical inputs give bit-identical matrices.
pub fn random_pair(
    seed: u64,
    dim: usize,
    ensemble: Ensemble,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let inst = draw(seed, dim, ensemble)?;
    Ok((inst.a, inst.k))
}

/// Gaussian Hermitian direction used for continuity probes, independent of the pair.
pub fn random_direction(seed: u64, dim: usize) -> HermitianOperator {
    let mut rng = SplitMix64::stream(seed ^ 0x5EED_D1AE_C710_0000, dim as u64);
    gaussian_hermitian(&mut rng, dim)
}
