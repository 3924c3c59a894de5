use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn factorial(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(x)_+^p / p!`, with `(x)_+^0` the right-continuous unit step.
fn truncated_power(x: f64, p: usize) -> f64 {
    if x < 0.0 {
        0.0
    } else if p == 0 {
        1.0
    } else {
        x.powi(p as i32) / factorial(p)
    }
}

/// Piecewise-smooth, compactly supported density in the time variable.
#[derive(Clone)]
pub enum TimeWeight {
    /// `(-1)^m (1 - t)^{m-1} / (m-1)!` on `[0, 1]`.
    Taylor(usize),
    /// `Σ_j (-1)^{m-j} C(m, j) (t - j)_+^{m-1} / (m-1)!` on `[0, m]`.
    BsplineFd(usize),
    Custom {
        label: String,
        /// Sorted; the first and last entries bound the support and the density
        /// is smooth between consecutive entries.
        breakpoints: Vec<f64>,
        density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for TimeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeWeight::Taylor(m) => write!(f, "Taylor({m})"),
            TimeWeight::BsplineFd(m) => write!(f, "BsplineFd({m})"),
            TimeWeight::Custom {
                label, breakpoints, ..
            } => {
                write!(f, "Custom({label}, breakpoints {breakpoints:?})")
            }
        }
    }
}

impl TimeWeight {
    pub fn custom<F>(
        label: impl Into<String>,
        mut breakpoints: Vec<f64>,
        density: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        if breakpoints.len() < 2 || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(
                "a time weight needs a finite support of positive length".into(),
            ));
        }
        Ok(TimeWeight::Custom {
            label: label.into(),
            breakpoints,
            density: Arc::new(density),
        })
    }

    pub fn label(&self) -> String {
        match self {
            TimeWeight::Taylor(m) => format!("taylor({m})"),
            TimeWeight::BsplineFd(m) => format!("bspline_fd({m})"),
            TimeWeight::Custom { label, .. } => label.clone(),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            TimeWeight::Taylor(_) => vec![0.0, 1.0],
            TimeWeight::BsplineFd(m) => (0..=*m).map(|j| j as f64).collect(),
            TimeWeight::Custom { breakpoints, .. } => breakpoints.clone(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let b = self.breakpoints();
        (b[0], b[b.len() - 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        match self {
            TimeWeight::Taylor(m) => {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * (1.0 - t).powi(*m as i32 - 1) / factorial(m - 1)
            }
            TimeWeight::BsplineFd(m) => (0..=*m)
                .map(|j| {
                    let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(*m, j) * truncated_power(t - j as f64, m - 1)
                })
                .sum(),
            TimeWeight::Custom { density, .. } => density(t),
        }
    }
}

/// Finitely supported signed measure `Σ λ_j δ_{t_j}` in the time variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTimeMeasure {
    pub points: Vec<(f64, f64)>,
}

pub const MOMENT_RTOL: f64 = 1e-10;

impl DiscreteTimeMeasure {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    /// `λ_j = (-1)^{m-j} C(m, j)` at `t_j = j`.
    pub fn binomial(m: usize) -> Self {
        Self::new(
            (0..=m)
                .map(|j| {
                    let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                    (j as f64, sign * binomial(m, j))
                })
                .collect(),
        )
    }

    /// `Σ λ_j t_j^k`
    pub fn moment(&self, k: usize) -> f64 {
        self.points.iter().map(|&(t, l)| l * t.powi(k as i32)).sum()
    }

    /// Requires `Σ λ_j t_j^k = 0` for `k < degree`, relative to `Σ |λ_j t_j^k|`.
    pub fn check_moments(&self, degree: usize) -> Result<()> {
        let failing: Vec<(usize, f64)> = (0..degree)
            .filter_map(|k| {
                let v = self.moment(k);
                let scale: f64 = self
                    .points
                    .iter()
                    .map(|&(t, l)| (l * t.powi(k as i32)).abs())
                    .sum();
                (v.abs() > MOMENT_RTOL * scale.max(f64::MIN_POSITIVE)).then_some((k, v))
            })
            .collect();
        if failing.is_empty() {
            Ok(())
        } else {
            Err(Error::MomentCondition { failing })
        }
    }

    /// Weight `(-1)^{m₀} Σ λ_j (t - t_j)_+^{r-1} / (r-1)!` with `r = m - m₀`, whose
    /// r-th derivative is the measure itself (up to the sign that matches the
    /// `(-1)^m` in the aggregation).
    pub fn weight(&self, m: usize, m0: usize) -> Result<TimeWeight> {
        let r = m - m0;
        let sign = if m0.is_multiple_of(2) { 1.0 } else { -1.0 };
        let points = self.points.clone();
        let breakpoints = points.iter().map(|p| p.0).collect();
        TimeWeight::custom(format!("psi(m={m},m0={m0})"), breakpoints, move |t| {
            sign * points
                .iter()
                .map(|&(tj, l)| l * truncated_power(t - tj, r - 1))
                .sum::<f64>()
        })
    }
}
