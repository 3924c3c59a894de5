use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::config::BesovConfig;
use super::function::{SmoothFunction, Spectrum, ANALYTIC_ORDER};
use super::window::make_window;
use crate::error::{Error, Result};
use crate::par;
use crate::quad::composite_nodes;

const POINTS_PER_PANEL: usize = 32;
const MAX_DOUBLINGS: usize = 8;
const MAX_LEVEL: i32 = 60;

/// Frequencies and coefficients with `f_n(x) = Re Σ c_j e^{i ξ_j x}`.
type Lines = Vec<(f64, Complex64)>;

fn spectrum_of(f: &SmoothFunction) -> Result<&Spectrum> {
    f.spectrum().ok_or_else(|| Error::Unsupported {
        label: f.label().to_string(),
        what: "Littlewood–Paley pieces (no Fourier transform metadata)".into(),
    })
}

fn eval_lines(lines: &Lines, k: usize, x: f64) -> f64 {
    lines
        .iter()
        .map(|&(xi, c)| {
            (c * Complex64::new(0.0, xi).powu(k as u32) * Complex64::from_polar(1.0, xi * x)).re
        })
        .sum()
}

/// Composite rule on `±[2^{n-1}, min(2^{n+1}, σ)]`, split at the spectral kinks
/// so that no kink of the transform lies inside a panel.
fn density_rule(
    d: &(dyn Fn(f64) -> Complex64 + Send + Sync),
    n: i32,
    band_limit: Option<f64>,
    kinks: &[f64],
    panels: usize,
) -> Lines {
    let w = make_window();
    let lo = 2f64.powi(n - 1);
    let hi = band_limit.map_or(2f64.powi(n + 1), |s| s.min(2f64.powi(n + 1)));
    let mut breaks = vec![lo];
    breaks.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
    breaks.push(hi);
    let mut out = Vec::with_capacity(4 * (panels + breaks.len()) * POINTS_PER_PANEL);
    for sign in [-1.0, 1.0] {
        for piece in breaks.windows(2) {
            let count =
                ((panels as f64 * (piece[1] - piece[0]) / (hi - lo)).ceil() as usize).max(1);
            for (xi, wt) in composite_nodes(piece[0], piece[1], count, POINTS_PER_PANEL) {
                let xi = sign * xi;
                let mult = w.multiplier(xi, n);
                if mult != 0.0 {
                    out.push((xi, d(xi) * (wt * mult / (2.0 * PI))));
                }
            }
        }
    }
    out
}

/// Quadrature realization of piece `n`, refined until the probe values settle.
fn piece_lines(f: &SmoothFunction, n: i32, cfg: &BesovConfig) -> Result<Lines> {
    match spectrum_of(f)? {
        Spectrum::Lines(lines) => {
            let w = make_window();
            Ok(lines
                .iter()
                .map(|&(xi, a)| (xi, a * w.multiplier(xi, n)))
                .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
                .collect())
        }
        Spectrum::Density(d) => {
            if let Some(sigma) = f.band_limit() {
                if 2f64.powi(n - 1) >= sigma {
                    return Ok(Vec::new());
                }
            }
            let width = 2f64.powi(n + 1) - 2f64.powi(n - 1);
            let base = (cfg.fourier_base_points / POINTS_PER_PANEL).max(1);
            let oscillation = (cfg.half_width * width / 30.0).ceil() as usize;
            let mut panels = base.max(oscillation);
            let probes = [-cfg.half_width, 0.0, cfg.half_width];
            let coarse = density_rule(d.as_ref(), n, f.band_limit(), f.spectral_kinks(), panels);
            let mut values: Vec<f64> = probes.iter().map(|&x| eval_lines(&coarse, 0, x)).collect();
            loop {
                panels *= 2;
                let finer = density_rule(d.as_ref(), n, f.band_limit(), f.spectral_kinks(), panels);
                let next: Vec<f64> = probes.iter().map(|&x| eval_lines(&finer, 0, x)).collect();
                let scale = finer.iter().map(|l| l.1.norm()).sum::<f64>();
                let settled = values
                    .iter()
                    .zip(&next)
                    .all(|(a, b)| (a - b).abs() <= cfg.fourier_rtol * scale.max(f64::MIN_POSITIVE));
                if settled {
                    return Ok(finer);
                }
                if panels >= base.max(oscillation) << MAX_DOUBLINGS {
                    return Err(Error::QuadratureNotConverged {
                        coarse: values,
                        fine: next,
                    });
                }
                values = next;
            }
        }
    }
}

/// Dyadic piece `f_n` with transform `[w(ξ/2^n) + w(-ξ/2^n)] Ff(ξ)`.
pub fn lp_piece(f: &SmoothFunction, n: i32, cfg: &BesovConfig) -> Result<SmoothFunction> {
    let lines = piece_lines(f, n, cfg)?;
    Ok(
        SmoothFunction::from_fn(format!("{}_{n}", f.label()), ANALYTIC_ORDER, move |k, x| {
            eval_lines(&lines, k, x)
        })
        .with_band_limit(2f64.powi(n + 1)),
    )
}

/// Sup of `Re Σ c e^{iξx}` over the grid, using a phase recurrence along each chunk.
fn grid_sup(lines: &Lines, cfg: &BesovConfig) -> f64 {
    if lines.is_empty() {
        return 0.0;
    }
    const CHUNK: usize = 256;
    let n = cfg.grid_points.max(2);
    let h = 2.0 * cfg.half_width / (n - 1) as f64;
    let steps: Vec<Complex64> = lines
        .iter()
        .map(|l| Complex64::from_polar(1.0, l.0 * h))
        .collect();
    let chunks = n.div_ceil(CHUNK);
    par::map_range(chunks, |c| {
        let start = c * CHUNK;
        let x0 = -cfg.half_width + start as f64 * h;
        let mut phase: Vec<Complex64> = lines
            .iter()
            .map(|&(xi, a)| a * Complex64::from_polar(1.0, xi * x0))
            .collect();
        let mut sup = 0.0f64;
        for _ in start..(start + CHUNK).min(n) {
            sup = sup.max(phase.iter().map(|p| p.re).sum::<f64>().abs());
            for (p, s) in phase.iter_mut().zip(&steps) {
                *p *= s;
            }
        }
        sup
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpRow {
    pub n: i32,
    pub sup_norm: f64,
    /// `2^{nm} ‖f_n‖_∞`
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSeminorm {
    pub value: f64,
    pub rows: Vec<LpRow>,
}

/// `Σ_n 2^{nm} ‖f_n‖_∞` over the pieces whose bound is not negligible.
pub fn besov_seminorm_lp(f: &SmoothFunction, m: usize, cfg: &BesovConfig) -> Result<LpSeminorm> {
    if f.is_polynomial() {
        return Err(Error::Unsupported {
            label: f.label().to_string(),
            what: "Besov seminorms (polynomials are excluded)".into(),
        });
    }
    spectrum_of(f)?;
    let mut rows = Vec::new();
    let mut total = 0.0;
    for dir in [1i32, -1] {
        let mut quiet = 0;
        let mut n: i32 = if dir == 1 { 0 } else { -1 };
        while n.abs() <= MAX_LEVEL && quiet < 3 {
            let lines = piece_lines(f, n, cfg)?;
            let scale = 2f64.powi(n * m as i32);
            let bound = scale * lines.iter().map(|l| l.1.norm()).sum::<f64>();
            if bound <= cfg.tail_tol * total {
                quiet += 1;
            } else {
                quiet = 0;
                let sup = grid_sup(&lines, cfg);
                total += scale * sup;
                rows.push(LpRow {
                    n,
                    sup_norm: sup,
                    weighted: scale * sup,
                });
            }
            n += dir;
        }
    }
    rows.sort_by_key(|r| r.n);
    let value = rows.iter().map(|r| r.weighted).sum();
    Ok(LpSeminorm { value, rows })
}
