use super::measure::ShiftMeasure;
use super::nu::sweep_kernel;
use crate::error::Result;
use crate::matcore::{eigh, HermitianOperator};

/// Counting-function form `ξ = N_A - N_{A+K}`: the i-th sorted eigenvalue of `A`
/// paired with that of `A + K` contributes a unit density on the interval between them,
/// signed by the direction of motion.
pub fn xi_counting(a: &HermitianOperator, k: &HermitianOperator) -> Result<ShiftMeasure> {
    let alpha = eigh(a)?.eigenvalues;
    let beta = eigh(&a.add_scaled(k, 1.0)?)?.eigenvalues;
    let mut out = ShiftMeasure::zero();
    for (&x, &y) in alpha.iter().zip(&beta) {
        if x != y {
            out.push_kernel(sweep_kernel(x, y), y - x);
        }
    }
    Ok(out)
}
