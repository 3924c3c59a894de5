//! Property-test harness: seeded ensembles, the trace-formula and structure
//! checks, and machine-readable reports.

mod checks;
mod config;
mod ensemble;
mod report;
pub mod rng;
mod suite;

pub use checks::{
    bandlimit_ratio, continuity_residuals, divdiff_oracle_residual, eta_xi_discrepancy,
    example_residual, limit_errors,
};
pub use config::{default_tolerances, SuiteConfig, CHECKS};
pub use ensemble::{draw, random_direction, random_pair, Ensemble, Instance};
pub use report::{Fingerprint, PropertyResult, Report, Status, Summary};
pub use suite::{run_suite, SUITE_VERSION};
