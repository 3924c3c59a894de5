//! Spectral shift measures: `ν_t`, the time-aggregated `μ_{A,K}` with its
//! Taylor, finite-difference and general point-mass weights, and Krein's `ξ`.

mod measure;
mod mu;
mod nu;
mod weights;
mod xi;

pub use measure::{
    atoms_json, density_csv, grid_density, integrate, ShiftMeasure, UniformGrid, DEFAULT_BINS,
};
pub use mu::{
    eta, kappa, mu_shift, mu_shift_detailed, psi_general, time_pairing, MuShift, QuadratureOptions,
    Realization,
};
pub use nu::{nu, ATOM_MERGE_RTOL};
pub use weights::{DiscreteTimeMeasure, TimeWeight, MOMENT_RTOL};
pub use xi::xi_counting;
