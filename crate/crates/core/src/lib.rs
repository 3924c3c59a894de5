//! Multiple operator integrals, operator Taylor remainders and higher-order
//! spectral shift measures for Hermitian matrices.

// Negated float comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod divdiff;
mod error;
pub mod matcore;
pub mod moi;
mod par;
pub mod quad;
pub mod shift;
pub mod verify;

pub use error::{Error, Result};
