use serde::{Deserialize, Serialize};

use super::measure::ShiftMeasure;
use super::nu::{merge_tolerance, nu_decomposed, nu_parts, sweep_kernel};
use super::weights::{DiscreteTimeMeasure, TimeWeight};
use crate::besov::{member, SmoothFunction};
use crate::error::{Error, Result};
use crate::matcore::{a_t, eigh, HermitianOperator, SpectralDecomposition};
use crate::moi::{check_order, trace_derivative_decomposed};
use crate::par;
use crate::quad::GaussLegendre;

/// How the time-aggregated measure is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    /// `ν_t` at each quadrature node, scaled by its weight; exact for the
    /// Gauss–Legendre rule on every integrand.
    #[default]
    Quadrature,
    /// Constant-cycle atoms are swept along the eigenvalue path over their
    /// quadrature cell, giving an absolutely continuous measure for simple spectra.
    Pushforward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureOptions {
    pub points: usize,
    /// Initial panel count, distributed over the smooth pieces of the weight.
    pub panels: usize,
    /// Doubling stops once every probe integral changes by less than
    /// `rtol · (|I| + abs_floor)`.
    pub rtol: f64,
    pub abs_floor: f64,
    pub max_doublings: usize,
    /// Use `panels` as given, without the doubling test.
    pub fixed: bool,
    pub realization: Realization,
    pub probes: Vec<String>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            points: 16,
            panels: 8,
            rtol: 1e-8,
            abs_floor: 1e-10,
            max_doublings: 6,
            fixed: false,
            realization: Realization::Quadrature,
            probes: vec!["gauss".into(), "rational".into(), "fejer1".into()],
        }
    }
}

impl QuadratureOptions {
    pub fn with_realization(mut self, r: Realization) -> Self {
        self.realization = r;
        self
    }

    pub fn with_fixed_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self.fixed = true;
        self
    }

    fn probe_functions(&self) -> Result<Vec<SmoothFunction>> {
        self.probes
            .iter()
            .map(|l| {
                member(l)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown probe function `{l}`")))
            })
            .collect()
    }
}

/// Composite rule over the smooth pieces of `w`: nodes, weights and the
/// `len + 1` cell boundaries whose gaps equal the weights.
pub(crate) struct TimeRule {
    pub nodes: Vec<(f64, f64)>,
    pub boundaries: Vec<f64>,
}

pub(crate) fn time_rule(w: &TimeWeight, panels: usize, points: usize) -> TimeRule {
    let breaks = w.breakpoints();
    let (lo, hi) = w.support();
    let total = hi - lo;
    let gl = GaussLegendre::get(points);
    let mut nodes = Vec::new();
    let mut boundaries = vec![lo];
    for piece in breaks.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let count = ((panels as f64 * (b - a) / total).round() as usize).max(1);
        let h = (b - a) / count as f64;
        for p in 0..count {
            let pa = a + p as f64 * h;
            let pb = if p + 1 == count { b } else { pa + h };
            let mut edge = pa;
            let cells: Vec<(f64, f64)> = gl.mapped(pa, pb).collect();
            for (i, &(t, c)) in cells.iter().enumerate() {
                nodes.push((t, c));
                edge = if i + 1 == cells.len() { pb } else { edge + c };
                boundaries.push(edge);
            }
        }
    }
    TimeRule { nodes, boundaries }
}

struct Level {
    rule: TimeRule,
    decompositions: Vec<SpectralDecomposition>,
    estimates: Vec<f64>,
    panels: usize,
}

fn sign(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn evaluate_level(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    w: &TimeWeight,
    probes: &[SmoothFunction],
    panels: usize,
    points: usize,
) -> Result<Level> {
    let rule = time_rule(w, panels, points);
    let per_node = par::map_slice(
        &rule.nodes,
        |&(t, _)| -> Result<(SpectralDecomposition, Vec<f64>)> {
            let d = eigh(&a_t(a, k, t)?)?;
            let values = probes
                .iter()
                .map(|f| trace_derivative_decomposed(f, &d, k, m))
                .collect::<Result<Vec<f64>>>()?;
            Ok((d, values))
        },
    );
    let per_node = per_node.into_iter().collect::<Result<Vec<_>>>()?;
    let s = sign(m);
    let estimates = (0..probes.len())
        .map(|p| {
            let terms: Vec<f64> = rule
                .nodes
                .iter()
                .zip(&per_node)
                .map(|(&(t, c), (_, v))| s * c * w.eval(t) * v[p])
                .collect();
            par::pairwise_sum(&terms)
        })
        .collect();
    Ok(Level {
        rule,
        decompositions: per_node.into_iter().map(|x| x.0).collect(),
        estimates,
        panels,
    })
}

/// The aggregated measure together with the quadrature that produced it.
#[derive(Debug, Clone)]
pub struct MuShift {
    pub measure: ShiftMeasure,
    /// Panel count of the accepted rule.
    pub panels: usize,
    /// `∫ f^{(m)} dμ` for each probe function at the accepted rule.
    pub estimates: Vec<f64>,
}

/// `(-1)^m ∫ ν_t w(t) dt` by composite Gauss–Legendre in `t`, refined by panel
/// doubling until the probe integrals settle.
pub fn mu_shift_detailed(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    w: &TimeWeight,
    opts: &QuadratureOptions,
) -> Result<MuShift> {
    check_order(m)?;
    if a.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: k.dim(),
        });
    }
    let probes = opts.probe_functions()?;
    let mut level = evaluate_level(a, k, m, w, &probes, opts.panels.max(1), opts.points)?;
    if !opts.fixed {
        let mut doublings = 0;
        loop {
            let finer = evaluate_level(a, k, m, w, &probes, level.panels * 2, opts.points)?;
            let settled = level
                .estimates
                .iter()
                .zip(&finer.estimates)
                .all(|(c, f)| (f - c).abs() < opts.rtol * (f.abs() + opts.abs_floor));
            if settled {
                level = finer;
                break;
            }
            doublings += 1;
            if doublings >= opts.max_doublings {
                return Err(Error::QuadratureNotConverged {
                    coarse: level.estimates,
                    fine: finer.estimates,
                });
            }
            level = finer;
        }
    }
    let measure = assemble(a, k, m, w, &level, opts.realization)?;
    Ok(MuShift {
        measure,
        panels: level.panels,
        estimates: level.estimates,
    })
}

pub fn mu_shift(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    w: &TimeWeight,
    opts: &QuadratureOptions,
) -> Result<ShiftMeasure> {
    Ok(mu_shift_detailed(a, k, m, w, opts)?.measure)
}

fn is_simple(eigenvalues: &[f64], i: usize) -> bool {
    let n = eigenvalues.len();
    let spread = eigenvalues[n - 1] - eigenvalues[0];
    let eps = 1e-8 * (1.0 + spread);
    (i == 0 || eigenvalues[i] - eigenvalues[i - 1] > eps)
        && (i + 1 == n || eigenvalues[i + 1] - eigenvalues[i] > eps)
}

fn assemble(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    w: &TimeWeight,
    level: &Level,
    realization: Realization,
) -> Result<ShiftMeasure> {
    let s = sign(m);
    let rule = &level.rule;
    let boundary_spectra = match realization {
        Realization::Quadrature => Vec::new(),
        Realization::Pushforward => par::map_slice(&rule.boundaries, |&b| -> Result<Vec<f64>> {
            Ok(eigh(&a_t(a, k, b)?)?.eigenvalues)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?,
    };
    let components = par::map_range(rule.nodes.len(), |q| -> Result<ShiftMeasure> {
        let (t, c) = rule.nodes[q];
        let d = &level.decompositions[q];
        let scale = s * w.eval(t);
        match realization {
            Realization::Quadrature => Ok(nu_decomposed(d, k, m)?.scaled(scale * c)),
            Realization::Pushforward => {
                let parts = nu_parts(d, k, m)?;
                let mut out = parts.rest.scaled(scale * c);
                for atom in parts.diagonal {
                    let i = atom.index;
                    if is_simple(&d.eigenvalues, i) {
                        let from = boundary_spectra[q][i];
                        let to = boundary_spectra[q + 1][i];
                        let weight = scale * atom.kii.powi(m as i32 - 1) * (to - from);
                        out.push_kernel(sweep_kernel(from, to), weight);
                    } else {
                        out.push_atom(d.eigenvalues[i], scale * c * atom.kii.powi(m as i32));
                    }
                }
                Ok(out)
            }
        }
    });
    let mut out = ShiftMeasure::zero();
    let mut diameter_spectrum = Vec::new();
    for (comp, d) in components.into_iter().zip(&level.decompositions) {
        out.add_scaled(&comp?, 1.0);
        diameter_spectrum.push(d.eigenvalues[0]);
        diameter_spectrum.push(d.eigenvalues[d.dim() - 1]);
    }
    Ok(out.merged(merge_tolerance(&diameter_spectrum)))
}

/// `⟨trace f(A_t), μ^{(m)}⟩ = (-1)^m ∫ trace d^m/dt^m f(A_t) w(t) dt` by the same
/// time rule that [`mu_shift`] accepts.
pub fn time_pairing(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    w: &TimeWeight,
    panels: usize,
    points: usize,
) -> Result<f64> {
    check_order(m)?;
    Ok(evaluate_level(a, k, m, w, std::slice::from_ref(f), panels, points)?.estimates[0])
}

/// Order-m spectral shift measure: `μ_{A,K}` for the Taylor weight.
pub fn eta(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    opts: &QuadratureOptions,
) -> Result<ShiftMeasure> {
    check_order(m)?;
    mu_shift(a, k, m, &TimeWeight::Taylor(m), opts)
}

/// Measure for the m-th finite difference: `μ_{A,K}` for the B-spline weight.
pub fn kappa(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    opts: &QuadratureOptions,
) -> Result<ShiftMeasure> {
    check_order(m)?;
    mu_shift(a, k, m, &TimeWeight::BsplineFd(m), opts)
}

/// Measure for `trace Σ_j λ_j d^{m₀}/dt^{m₀} f(A_t)|_{t_j}`, defined when the time
/// measure annihilates polynomials of degree below `m - m₀`.
pub fn psi_general(
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    points: &DiscreteTimeMeasure,
    m0: usize,
    opts: &QuadratureOptions,
) -> Result<ShiftMeasure> {
    check_order(m)?;
    if m0 >= m {
        return Err(Error::OrderOutOfRange {
            value: m0,
            min: 0,
            max: m - 1,
        });
    }
    points.check_moments(m - m0)?;
    mu_shift(a, k, m, &points.weight(m, m0)?, opts)
}
