use serde::{Deserialize, Serialize};

/// Grid and truncation constants for the seminorm computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BesovConfig {
    /// Sup norms are taken over `[-half_width, half_width]`.
    pub half_width: f64,
    pub grid_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Composite Gauss–Legendre in `log t`.
    pub t_panels: usize,
    pub t_points: usize,
    /// Endpoint integrand above this fraction of the maximum signals divergence.
    pub divergence_ratio: f64,
    /// Starting size of the inverse-Fourier rule, doubled until converged.
    pub fourier_base_points: usize,
    pub fourier_rtol: f64,
    /// Dyadic pieces whose bound falls below this fraction of the running sum are dropped.
    pub tail_tol: f64,
}

impl Default for BesovConfig {
    fn default() -> Self {
        Self {
            half_width: 50.0,
            grid_points: 16384,
            t_min: 1e-4,
            t_max: 1e4,
            t_panels: 64,
            t_points: 16,
            divergence_ratio: 1e-3,
            fourier_base_points: 256,
            fourier_rtol: 1e-10,
            tail_tol: 1e-8,
        }
    }
}

impl BesovConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points.max(2);
        let h = 2.0 * self.half_width / (n - 1) as f64;
        (0..n).map(|i| -self.half_width + i as f64 * h).collect()
    }
}
