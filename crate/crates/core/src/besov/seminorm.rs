use super::config::BesovConfig;
use super::function::SmoothFunction;
use crate::error::{Error, Result};
use crate::par;
use crate::quad::composite_nodes;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ_t^k f`, where `(Δ_t f)(x) = f(x + t) - f(x)`.
///
/// Polynomials of degree below `k` are mapped to the exact zero function.
///
/// # Panics
/// If `k == 0`.
pub fn delta_power(f: &SmoothFunction, t: f64, k: usize) -> SmoothFunction {
    assert!(k >= 1, "difference order must be at least 1");
    let label = format!("Δ_{t}^{k} {}", f.label());
    if let Some(d) = f.polynomial_degree() {
        if d < k {
            return SmoothFunction::from_fn(label, f.k_max(), |_, _| 0.0);
        }
    }
    let coeffs: Vec<f64> = (0..=k)
        .map(|j| if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(k, j))
        .collect();
    let g = f.clone();
    SmoothFunction::from_fn(label, f.k_max(), move |d, x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * g.deriv_unchecked(d, x + j as f64 * t))
            .sum()
    })
}

/// Difference-characterization seminorm with an optional caveat.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSeminorm {
    pub value: f64,
    pub caveat: Option<String>,
}

/// `∫_ℝ ‖Δ_t^{m+1} f‖_∞ / |t|^{1+m} dt`, sup norms over the configured grid.
pub fn besov_seminorm_diff(
    f: &SmoothFunction,
    m: usize,
    cfg: &BesovConfig,
) -> Result<DiffSeminorm> {
    let k = m + 1;
    if let Some(d) = f.polynomial_degree() {
        if d <= m {
            return Ok(DiffSeminorm {
                value: 0.0,
                caveat: Some(format!(
                    "`{}` is a polynomial of degree {d} ≤ {m}: the difference integral vanishes, \
                     membership holds only modulo polynomials",
                    f.label()
                )),
            });
        }
        return Err(Error::Divergent {
            label: f.label().to_string(),
            end: "large t",
        });
    }
    let grid = cfg.grid();
    let coeffs: Vec<f64> = (0..=k)
        .map(|j| if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(k, j))
        .collect();
    // integrand in u = ln t, so dt / t^{1+m} = du / t^m
    let integrand = |t: f64| {
        let sup = grid.iter().fold(0.0f64, |acc, &x| {
            let v: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * f.eval(x + j as f64 * t))
                .sum();
            acc.max(v.abs())
        });
        sup / t.powi(m as i32)
    };
    let nodes = composite_nodes(cfg.t_min.ln(), cfg.t_max.ln(), cfg.t_panels, cfg.t_points);
    let values = par::map_slice(&nodes, |&(u, _)| integrand(u.exp()));
    let weighted: Vec<f64> = nodes.iter().zip(&values).map(|((_, w), v)| w * v).collect();
    let peak = values.iter().fold(0.0f64, |a, &v| a.max(v));
    let ends = [(cfg.t_min, "small t"), (cfg.t_max, "large t")];
    for (t, end) in ends {
        if integrand(t) > cfg.divergence_ratio * peak {
            return Err(Error::Divergent {
                label: f.label().to_string(),
                end,
            });
        }
    }
    // ‖Δ_{-t}^k f‖_∞ = ‖Δ_t^k f‖_∞
    Ok(DiffSeminorm {
        value: 2.0 * par::pairwise_sum(&weighted),
        caveat: None,
    })
}
