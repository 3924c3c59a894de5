use std::time::SystemTime;

use super::checks::run_check;
use super::config::{SuiteConfig, CHECKS};
use super::report::{summarize, Fingerprint, PropertyResult, Report};
use crate::error::Result;

/// Version stamp of the check set and report schema.
pub const SUITE_VERSION: &str = concat!("shiftlab-suite/", env!("CARGO_PKG_VERSION"));

/// Runs every check in report order. Results within a check are ordered by
/// (seed, dim, m, function) whatever order the instances finish in.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut results = Vec::new();
    for &check in CHECKS {
        if cfg.runs(check) {
            results.extend(run_check(cfg, check));
        } else {
            results.push(PropertyResult::skipped(
                check,
                Fingerprint::new(0, None, None, None),
                cfg.tolerance(check),
                "not evaluated",
                "excluded by the `only` list",
            ));
        }
    }
    let summary = summarize(&results);
    Ok(Report {
        suite_version: SUITE_VERSION.to_string(),
        config_echo: cfg.clone(),
        results,
        summary,
        generated_at: humantime::format_rfc3339_seconds(SystemTime::now()).to_string(),
    })
}
