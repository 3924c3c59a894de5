use serde::{Deserialize, Serialize};

use super::config::SuiteConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// Which instance a result belongs to; fields that do not apply are null.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub dim: Option<usize>,
    pub m: Option<usize>,
    pub f: Option<String>,
}

impl Fingerprint {
    pub fn new(seed: u64, dim: Option<usize>, m: Option<usize>, f: Option<&str>) -> Self {
        Self {
            seed,
            dim,
            m,
            f: f.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub status: Status,
    /// Non-finite residuals are serialized as null.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub fingerprint: Fingerprint,
    /// The bound the tolerance derives from.
    pub tolerance_source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyResult {
    /// Pass iff `residual ≤ tolerance`; NaN and infinity fail.
    pub fn judged(
        name: &str,
        fingerprint: Fingerprint,
        residual: f64,
        tolerance: f64,
        source: &str,
    ) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        Self {
            name: name.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            residual: residual.is_finite().then_some(residual),
            tolerance,
            fingerprint,
            tolerance_source: source.to_string(),
            note: None,
        }
    }

    pub fn skipped(
        name: &str,
        fingerprint: Fingerprint,
        tolerance: f64,
        source: &str,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            name: name.to_string(),
            status: Status::Skip,
            residual: None,
            tolerance,
            fingerprint,
            tolerance_source: source.to_string(),
            note: Some(reason.into()),
        }
    }

    /// A computation error counts as a failure and carries the message.
    pub fn errored(
        name: &str,
        fingerprint: Fingerprint,
        tolerance: f64,
        source: &str,
        err: &crate::Error,
    ) -> Self {
        let mut r = Self::judged(name, fingerprint, f64::INFINITY, tolerance, source);
        r.note = Some(format!("error: {err}"));
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite_version: String,
    pub config_echo: SuiteConfig,
    pub results: Vec<PropertyResult>,
    pub summary: Summary,
    pub generated_at: String,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with its timestamp blanked, for reproducibility comparisons.
    pub fn without_timestamp(&self) -> Report {
        Report {
            generated_at: String::new(),
            ..self.clone()
        }
    }
}

pub(crate) fn summarize(results: &[PropertyResult]) -> Summary {
    let mut s = Summary::default();
    for r in results {
        match r.status {
            Status::Pass => s.pass += 1,
            Status::Fail => s.fail += 1,
            Status::Skip => s.skip += 1,
        }
    }
    s
}
