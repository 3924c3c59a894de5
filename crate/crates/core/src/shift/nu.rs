use super::measure::ShiftMeasure;
use crate::divdiff::{peano_kernel, NodeMultiset, PeanoKernel};
use crate::error::Result;
use crate::matcore::{a_t, eigh, HermitianOperator, SpectralDecomposition};
use crate::moi::{check_budget, check_order, for_each_cycle};
use crate::par;

/// Atoms closer than this fraction of the spectral diameter are merged.
pub const ATOM_MERGE_RTOL: f64 = 1e-10;

pub(crate) fn merge_tolerance(eigenvalues: &[f64]) -> f64 {
    let lo = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    ATOM_MERGE_RTOL * (hi - lo)
}

/// Atom of `ν_t` from the constant cycle `(i, …, i)`: weight `K̃_ii^m` at `λ_i`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DiagonalAtom {
    pub index: usize,
    pub kii: f64,
}

/// `ν_t` split into the constant-cycle atoms and everything else.
pub(crate) struct NuParts {
    pub rest: ShiftMeasure,
    pub diagonal: Vec<DiagonalAtom>,
}

pub(crate) fn nu_parts(
    d: &SpectralDecomposition,
    k: &HermitianOperator,
    m: usize,
) -> Result<NuParts> {
    let n = d.dim();
    check_budget(n, m)?;
    let kt = d.to_eigenbasis(k.matrix());
    let lambda = &d.eigenvalues;
    let rows = par::map_range(n, |i1| -> Result<ShiftMeasure> {
        let mut part = ShiftMeasure::zero();
        let mut nodes = vec![0.0; m + 1];
        for_each_cycle(&kt, m, i1, |idx, p| {
            if idx.iter().all(|&i| i == i1) {
                return Ok(());
            }
            for (slot, &i) in nodes.iter_mut().zip(idx) {
                *slot = lambda[i];
            }
            nodes[m] = lambda[i1];
            part.push_kernel(peano_kernel(&NodeMultiset::new(&nodes)), p.re);
            Ok(())
        })?;
        Ok(part)
    });
    let mut rest = ShiftMeasure::zero();
    for r in rows {
        rest.add_scaled(&r?, 1.0);
    }
    let diagonal = (0..n)
        .map(|i| DiagonalAtom {
            index: i,
            kii: kt[(i, i)].re,
        })
        .filter(|a| a.kii != 0.0)
        .collect();
    Ok(NuParts { rest, diagonal })
}

pub(crate) fn nu_decomposed(
    d: &SpectralDecomposition,
    k: &HermitianOperator,
    m: usize,
) -> Result<ShiftMeasure> {
    let parts = nu_parts(d, k, m)?;
    let mut out = parts.rest;
    for a in parts.diagonal {
        out.push_atom(d.eigenvalues[a.index], a.kii.powi(m as i32));
    }
    Ok(out.merged(merge_tolerance(&d.eigenvalues)))
}

/// The measure `ν_t` with `trace d^m/dt^m f(A + tK) = ∫ f^{(m)} dν_t`: a Peano
/// kernel per cyclic multi-index in the eigenbasis of `A_t`, weighted by the real
/// part of the cyclic product of `K̃` entries.
pub fn nu(a: &HermitianOperator, k: &HermitianOperator, m: usize, t: f64) -> Result<ShiftMeasure> {
    check_order(m)?;
    let d = eigh(&a_t(a, k, t)?)?;
    nu_decomposed(&d, k, m)
}

/// Indicator spline of the interval traversed by an eigenvalue.
pub(crate) fn sweep_kernel(from: f64, to: f64) -> PeanoKernel {
    PeanoKernel::interval(from, to)
}
