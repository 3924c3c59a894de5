use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use crate::besov::{member, BesovConfig};
use crate::error::{Error, Result};
use crate::moi::{MAX_ORDER, MIN_ORDER};
use crate::shift::QuadratureOptions;

/// Names of every check, in report order.
pub const CHECKS: &[&str] = &[
    "krein",
    "taylor",
    "taylor_refinement",
    "koplienko",
    "taylor_identity",
    "fd_identity",
    "fd_trace",
    "limit",
    "continuity",
    "homogeneity",
    "trace_derivative",
    "example",
    "nu_identity",
    "nu_mass",
    "divdiff_oracle",
    "eta_xi",
    "absolute_continuity",
    "besov_sin",
    "besov_partition",
    "besov_bandlimit",
];

/// Default tolerance per check.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("krein", 1e-8),
        ("taylor", 1e-6),
        ("taylor_refinement", 2.5e-7),
        ("koplienko", 1e-6),
        ("taylor_identity", 1e-9),
        ("fd_identity", 1e-9),
        ("fd_trace", 1e-6),
        // terminal/initial error ratio implied by slope 0.9 over seven halvings
        ("limit", 2f64.powf(-7.0 * 0.9)),
        ("continuity", 1e-6),
        ("homogeneity", 1e-12),
        ("trace_derivative", 1e-10),
        ("example", 1e-10),
        ("nu_identity", 1e-9),
        ("nu_mass", 1e-10),
        ("divdiff_oracle", 1e-8),
        ("eta_xi", 2e-6),
        ("absolute_continuity", 1e-12),
        ("besov_sin", 1e-2),
        ("besov_partition", 1e-12),
        ("besov_bandlimit", 1.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Everything that determines a suite run; serialized verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub orders: Vec<usize>,
    pub seeds: Vec<u64>,
    pub ensemble: Ensemble,
    /// Corpus labels paired with every instance.
    pub functions: Vec<String>,
    /// Overrides merged over [`default_tolerances`].
    pub tolerances: BTreeMap<String, f64>,
    pub quadrature: QuadratureOptions,
    pub besov: BesovConfig,
    /// Evaluation time for the single-time measure checks.
    pub t: f64,
    /// Random pairs per seed in the divided-difference oracle.
    pub divdiff_pairs: usize,
    /// Restricts the run to these checks; empty means all.
    pub only: Vec<String>,
    /// Test hook: adds 1e-3 to one entry of the staggered integral in the
    /// finite-difference identity.
    pub inject_moi_fault: bool,
    /// Failing instances dump matrices and measure CSVs here.
    pub artifact_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 4, 6, 8],
            orders: vec![1, 2, 3],
            seeds: vec![11, 22, 33, 44, 55],
            ensemble: Ensemble::GaussianHermitian,
            functions: vec!["gauss".into(), "rational".into(), "fejer1".into()],
            tolerances: BTreeMap::new(),
            quadrature: QuadratureOptions::default(),
            besov: BesovConfig::default(),
            t: 0.3,
            divdiff_pairs: 200,
            only: Vec::new(),
            inject_moi_fault: false,
            artifact_dir: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidInput(
                "dims must be a nonempty list of integers ≥ 1".into(),
            ));
        }
        if self.orders.is_empty() {
            return Err(Error::InvalidInput("orders must be nonempty".into()));
        }
        if let Some(&m) = self
            .orders
            .iter()
            .find(|m| !(MIN_ORDER..=MAX_ORDER).contains(m))
        {
            return Err(Error::OrderOutOfRange {
                value: m,
                min: MIN_ORDER,
                max: MAX_ORDER,
            });
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidInput("seeds must be nonempty".into()));
        }
        if let Some(l) = self.functions.iter().find(|l| member(l).is_none()) {
            return Err(Error::InvalidInput(format!("unknown function label `{l}`")));
        }
        if let Some(c) = self
            .tolerances
            .keys()
            .chain(&self.only)
            .find(|c| !CHECKS.contains(&c.as_str()))
        {
            return Err(Error::InvalidInput(format!("unknown check `{c}`")));
        }
        if let Some((c, v)) = self.tolerances.iter().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "tolerance for `{c}` must be ≥ 0, got {v}"
            )));
        }
        Ok(())
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .unwrap_or_else(|| default_tolerances()[check])
    }

    pub fn runs(&self, check: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|c| c == check)
    }
}
