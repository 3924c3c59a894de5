use std::fs;
use std::path::Path;

use super::config::SuiteConfig;
use super::ensemble::{draw, random_direction, Ensemble, Instance};
use super::report::{Fingerprint, PropertyResult, Status};
use super::rng::SplitMix64;
use crate::besov::{besov_seminorm_diff, corpus, make_window, member, SmoothFunction};
use crate::divdiff::{divided_difference, kernel_integrate, peano_kernel, NodeMultiset};
use crate::error::{Error, Result};
use crate::matcore::{
    eigh, matfun, schatten, truncate_spectrum, CMatrix, HermitianOperator, MatrixFile,
    SchattenIndex,
};
use crate::moi::{
    derivative, finite_difference_paths, moi_eval, taylor_remainder_paths, trace_derivative,
    MoiProblem,
};
use crate::par;
use crate::shift::{
    density_csv, eta, grid_density, integrate, kappa, mu_shift, nu, xi_counting, QuadratureOptions,
    Realization, ShiftMeasure, TimeWeight, UniformGrid, DEFAULT_BINS,
};

const SRC_EIGEN: &str =
    "eigensolver: off-diagonal norm ≤ 1e-13·‖A‖_F, propagated through the cycle sums";
const SRC_QUAD: &str =
    "t-quadrature: composite Gauss–Legendre, panel doubling until probes settle to 1e-8";
const SRC_QUAD_FIXED: &str = "t-quadrature: composite Gauss–Legendre at doubled fixed panel count";
const SRC_KERNEL: &str =
    "kernel quadrature: Gauss–Legendre per knot interval, exact for the spline factor";
const SRC_PATHS: &str = "path agreement: both evaluations are exact up to eigensolver rounding";
const SRC_FLOAT: &str = "floating-point rounding of an exact algebraic identity";
const SRC_LIMIT: &str =
    "first-order convergence: slope ≥ 0.9 over seven halvings gives ratio ≤ 2^(-6.3)";
const SRC_CONTINUITY: &str =
    "Lipschitz bound sup|f^(m+1)|·‖K‖^m times a 2^-20 step along a unit S_1 direction";
const SRC_GRID: &str =
    "bin-averaged densities: both measures are exact per bin up to kernel quadrature";
const SRC_BESOV: &str = "log-t Gauss–Legendre on the seminorm integral, 1% analytic target";
const SRC_WINDOW: &str = "smooth-step window telescopes exactly; rounding only";
const SRC_BANDLIMIT: &str = "Bernstein inequality with the cycle-sum bound; constant 1";

fn rel(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / (1.0 + reference.abs())
}

fn functions(cfg: &SuiteConfig) -> Vec<SmoothFunction> {
    cfg.functions.iter().filter_map(|l| member(l)).collect()
}

fn seed_dims(cfg: &SuiteConfig) -> Vec<(u64, usize)> {
    cfg.seeds
        .iter()
        .flat_map(|&s| cfg.dims.iter().map(move |&d| (s, d)))
        .collect()
}

fn seed_dim_orders(cfg: &SuiteConfig) -> Vec<(u64, usize, usize)> {
    seed_dims(cfg)
        .into_iter()
        .flat_map(|(s, d)| cfg.orders.iter().map(move |&m| (s, d, m)))
        .collect()
}

/// Runs `body` per job in parallel and concatenates the results in job order.
fn per_job<J, F>(jobs: &[J], body: F) -> Vec<PropertyResult>
where
    J: Sync,
    F: Fn(&J) -> Vec<PropertyResult> + Sync + Send,
{
    par::map_slice(jobs, body).into_iter().flatten().collect()
}

fn fp(seed: u64, dim: usize, m: Option<usize>, f: Option<&str>) -> Fingerprint {
    Fingerprint::new(seed, Some(dim), m, f)
}

/// One result per function from a fallible residual, failures dumped.
#[allow(clippy::too_many_arguments)]
fn per_function<F>(
    cfg: &SuiteConfig,
    name: &str,
    source: &str,
    seed: u64,
    dim: usize,
    m: Option<usize>,
    inst: Option<&Instance>,
    measure: Option<&ShiftMeasure>,
    residual: F,
) -> Vec<PropertyResult>
where
    F: Fn(&SmoothFunction) -> Result<f64>,
{
    let tol = cfg.tolerance(name);
    functions(cfg)
        .iter()
        .map(|f| {
            let print = fp(seed, dim, m, Some(f.label()));
            let r = match residual(f) {
                Ok(v) => PropertyResult::judged(name, print, v, tol, source),
                Err(e) => PropertyResult::errored(name, print, tol, source, &e),
            };
            dump_failure(cfg, r, inst, measure)
        })
        .collect()
}

fn single<F>(
    cfg: &SuiteConfig,
    name: &str,
    source: &str,
    print: Fingerprint,
    inst: Option<&Instance>,
    measure: Option<&ShiftMeasure>,
    residual: F,
) -> PropertyResult
where
    F: FnOnce() -> Result<(f64, Option<String>)>,
{
    let tol = cfg.tolerance(name);
    let r = match residual() {
        Ok((v, note)) => {
            let r = PropertyResult::judged(name, print, v, tol, source);
            match note {
                Some(n) => r.with_note(n),
                None => r,
            }
        }
        Err(e) => PropertyResult::errored(name, print, tol, source, &e),
    };
    dump_failure(cfg, r, inst, measure)
}

fn errored_all(
    cfg: &SuiteConfig,
    name: &str,
    source: &str,
    seed: u64,
    dim: usize,
    m: Option<usize>,
    e: &Error,
) -> Vec<PropertyResult> {
    let tol = cfg.tolerance(name);
    functions(cfg)
        .iter()
        .map(|f| PropertyResult::errored(name, fp(seed, dim, m, Some(f.label())), tol, source, e))
        .collect()
}

/// Writes the instance matrices and the measure density of a failing result.
fn dump_failure(
    cfg: &SuiteConfig,
    r: PropertyResult,
    inst: Option<&Instance>,
    measure: Option<&ShiftMeasure>,
) -> PropertyResult {
    let Some(dir) = cfg.artifact_dir.as_deref() else {
        return r;
    };
    if r.status != Status::Fail || inst.is_none() {
        return r;
    }
    let print = &r.fingerprint;
    let mut tag = format!("{}_seed{}", r.name, print.seed);
    if let Some(d) = print.dim {
        tag.push_str(&format!("_n{d}"));
    }
    if let Some(m) = print.m {
        tag.push_str(&format!("_m{m}"));
    }
    if let Some(f) = &print.f {
        tag.push('_');
        tag.extend(
            f.chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }),
        );
    }
    match write_artifacts(&dir.join(tag), inst.expect("checked above"), measure) {
        Ok(()) => r,
        Err(e) => {
            let note = format!(
                "{}; artifact dump failed: {e}",
                r.note.clone().unwrap_or_default()
            );
            r.with_note(note)
        }
    }
}

fn write_artifacts(
    dir: &Path,
    inst: &Instance,
    measure: Option<&ShiftMeasure>,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("A.json"), MatrixFile::render(inst.a.matrix()))?;
    fs::write(dir.join("K.json"), MatrixFile::render(inst.k.matrix()))?;
    if let Some(mu) = measure {
        if let Some((lo, hi)) = mu.support() {
            let grid = UniformGrid::new(lo - 1.0, hi + 1.0, DEFAULT_BINS)
                .map_err(std::io::Error::other)?;
            let csv = density_csv(mu, &grid, &[]).map_err(std::io::Error::other)?;
            fs::write(dir.join("measure.csv"), csv)?;
            fs::write(dir.join("atoms.json"), crate::shift::atoms_json(mu))?;
        }
    }
    Ok(())
}

fn trace_of_difference(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
) -> Result<f64> {
    let b = a.add_scaled(k, 1.0)?;
    Ok(matfun(f, &b)?.trace() - matfun(f, a)?.trace())
}

pub(crate) fn check_krein(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "krein";
    per_job(&seed_dims(cfg), |&(seed, dim)| {
        let prepared = draw(seed, dim, cfg.ensemble).and_then(|inst| {
            let xi = xi_counting(&inst.a, &inst.k)?;
            Ok((inst, xi))
        });
        match prepared {
            Ok((inst, xi)) => per_function(
                cfg,
                name,
                SRC_EIGEN,
                seed,
                dim,
                None,
                Some(&inst),
                Some(&xi),
                |f| {
                    let lhs = trace_of_difference(f, &inst.a, &inst.k)?;
                    Ok(rel(integrate(&xi, &f.derivative(1)?), lhs))
                },
            ),
            Err(e) => errored_all(cfg, name, SRC_EIGEN, seed, dim, None, &e),
        }
    })
}

fn measure_check<M>(
    cfg: &SuiteConfig,
    name: &str,
    source: &str,
    build: M,
    lhs: fn(&SmoothFunction, &Instance, usize) -> Result<f64>,
) -> Vec<PropertyResult>
where
    M: Fn(&Instance, usize) -> Result<ShiftMeasure> + Sync + Send,
{
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let prepared = draw(seed, dim, cfg.ensemble).and_then(|inst| {
            let mu = build(&inst, m)?;
            Ok((inst, mu))
        });
        match prepared {
            Ok((inst, mu)) => per_function(
                cfg,
                name,
                source,
                seed,
                dim,
                Some(m),
                Some(&inst),
                Some(&mu),
                |f| {
                    let want = lhs(f, &inst, m)?;
                    Ok(rel(integrate(&mu, &f.derivative(m)?), want))
                },
            ),
            Err(e) => errored_all(cfg, name, source, seed, dim, Some(m), &e),
        }
    })
}

fn taylor_trace(f: &SmoothFunction, inst: &Instance, m: usize) -> Result<f64> {
    Ok(taylor_remainder_paths(f, &inst.a, &inst.k, m)?
        .direct
        .trace()
        .re)
}

fn fd_trace(f: &SmoothFunction, inst: &Instance, m: usize) -> Result<f64> {
    Ok(finite_difference_paths(f, &inst.a, &inst.k, m)?
        .direct
        .trace()
        .re)
}

pub(crate) fn check_taylor(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    measure_check(
        cfg,
        "taylor",
        SRC_QUAD,
        |inst, m| eta(&inst.a, &inst.k, m, &cfg.quadrature),
        taylor_trace,
    )
}

/// Residuals at the default and the doubled fixed panel count; the result is
/// judged on the doubled one.
pub(crate) fn check_taylor_refinement(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "taylor_refinement";
    let panels = cfg.quadrature.panels.max(1);
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let coarse_opts = cfg.quadrature.clone().with_fixed_panels(panels);
        let fine_opts = cfg.quadrature.clone().with_fixed_panels(2 * panels);
        let w = TimeWeight::Taylor(m);
        let prepared = draw(seed, dim, cfg.ensemble).and_then(|inst| {
            let coarse = mu_shift(&inst.a, &inst.k, m, &w, &coarse_opts)?;
            let fine = mu_shift(&inst.a, &inst.k, m, &w, &fine_opts)?;
            Ok((inst, coarse, fine))
        });
        let (inst, coarse, fine) = match prepared {
            Ok(p) => p,
            Err(e) => return errored_all(cfg, name, SRC_QUAD_FIXED, seed, dim, Some(m), &e),
        };
        functions(cfg)
            .iter()
            .map(|f| {
                let print = fp(seed, dim, Some(m), Some(f.label()));
                single(
                    cfg,
                    name,
                    SRC_QUAD_FIXED,
                    print,
                    Some(&inst),
                    Some(&fine),
                    || {
                        let want = taylor_trace(f, &inst, m)?;
                        let g = f.derivative(m)?;
                        let r_coarse = rel(integrate(&coarse, &g), want);
                        let r_fine = rel(integrate(&fine, &g), want);
                        Ok((
                            r_fine,
                            Some(format!(
                                "residual {r_coarse:.3e} at {panels} panels, {r_fine:.3e} at {}",
                                2 * panels
                            )),
                        ))
                    },
                )
            })
            .collect()
    })
}

pub(crate) fn check_koplienko(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "koplienko";
    let f = SmoothFunction::rational(1.0, 0.0).with_label("rational");
    per_job(&seed_dims(cfg), |&(seed, dim)| {
        let print = fp(seed, dim, Some(2), Some(f.label()));
        let inst = match draw(seed, dim, cfg.ensemble) {
            Ok(i) => i,
            Err(e) => {
                return vec![PropertyResult::errored(
                    name,
                    print,
                    cfg.tolerance(name),
                    SRC_QUAD,
                    &e,
                )]
            }
        };
        let mu = eta(&inst.a, &inst.k, 2, &cfg.quadrature);
        let r = single(
            cfg,
            name,
            SRC_QUAD,
            print,
            Some(&inst),
            mu.as_ref().ok(),
            || {
                let mu = mu.clone()?;
                let want = taylor_trace(&f, &inst, 2)?;
                Ok((rel(integrate(&mu, &f.derivative(2)?), want), None))
            },
        );
        vec![r]
    })
}

fn path_check<P>(cfg: &SuiteConfig, name: &str, residual: P) -> Vec<PropertyResult>
where
    P: Fn(&SmoothFunction, &Instance, usize) -> Result<f64> + Sync + Send,
{
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        match draw(seed, dim, cfg.ensemble) {
            Ok(inst) => per_function(
                cfg,
                name,
                SRC_PATHS,
                seed,
                dim,
                Some(m),
                Some(&inst),
                None,
                |f| residual(f, &inst, m),
            ),
            Err(e) => errored_all(cfg, name, SRC_PATHS, seed, dim, Some(m), &e),
        }
    })
}

pub(crate) fn check_taylor_identity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    path_check(cfg, "taylor_identity", |f, inst, m| {
        let p = taylor_remainder_paths(f, &inst.a, &inst.k, m)?;
        Ok(p.frobenius_residual() / (1.0 + p.direct.frobenius()))
    })
}

pub(crate) fn check_fd_identity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    path_check(cfg, "fd_identity", |f, inst, m| {
        let mut p = finite_difference_paths(f, &inst.a, &inst.k, m)?;
        if cfg.inject_moi_fault {
            p.moi[(0, 0)] += 1e-3;
        }
        Ok(p.max_residual() / p.scale())
    })
}

pub(crate) fn check_fd_trace(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    measure_check(
        cfg,
        "fd_trace",
        SRC_QUAD,
        |inst, m| kappa(&inst.a, &inst.k, m, &cfg.quadrature),
        fd_trace,
    )
}

/// Least-squares slope of `log y` against `log x`.
fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `‖h^{-m} Δ^m_{hK} f(A) - d^m/dt^m f(A_t)|_0‖_max` for `h = 2^-3 … 2^-10`.
pub fn limit_errors(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
) -> Result<Vec<(f64, f64)>> {
    let target = derivative(f, a, k, m, 0.0)?;
    (3..=10)
        .map(|j| {
            let h = 2f64.powi(-j);
            let fd = finite_difference_paths(f, a, &k.scale(h), m)?.direct;
            Ok((h, fd.scale(h.powi(-(m as i32))).max_abs_diff(&target)))
        })
        .collect()
}

pub(crate) fn check_limit(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "limit";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        match draw(seed, dim, cfg.ensemble) {
            Ok(inst) => functions(cfg)
                .iter()
                .map(|f| {
                    let print = fp(seed, dim, Some(m), Some(f.label()));
                    single(cfg, name, SRC_LIMIT, print, Some(&inst), None, || {
                        let pts = limit_errors(f, &inst.a, &inst.k, m)?;
                        let (h, e): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                        if e.iter().all(|&v| v == 0.0) {
                            return Ok((0.0, Some("all errors exactly zero".into())));
                        }
                        let ratio = e[e.len() - 1] / e[0];
                        let slope = fitted_slope(&h, &e);
                        let note = format!("slope {slope:.4}, terminal/initial {ratio:.4e}");
                        if !strictly_decreasing(&e) {
                            return Ok((
                                f64::INFINITY,
                                Some(format!("errors not monotone; {note}")),
                            ));
                        }
                        if !(slope >= 0.9) {
                            return Ok((f64::INFINITY, Some(format!("slope below 0.9; {note}"))));
                        }
                        Ok((ratio, Some(note)))
                    })
                })
                .collect(),
            Err(e) => errored_all(cfg, name, SRC_LIMIT, seed, dim, Some(m), &e),
        }
    })
}

/// Trace norm of the Hermitian part of `m`.
fn trace_norm(m: &CMatrix) -> Result<f64> {
    let h = HermitianOperator::new((m + &m.adjoint()).scale(0.5))?;
    schatten(&h, SchattenIndex::ONE)
}

/// `‖I(A_c + 2^{-j} R) - I(A_c)‖_{S_1}` for `j = 4 … 20`, with `A_c` the spectral
/// truncation of `A` to `[-2, 2]`, `R` a unit-trace-norm direction and `I(B)` the
/// integral of `𝔇^m f` with all spectral measures at `B` and all middles `K`.
///
/// Also returns the Lipschitz scale `sup |f^{(m+1)}| · ‖K‖^m`, the sup taken
/// over the spectral hull of `A_c` widened by 1.
pub fn continuity_residuals(
    f: &SmoothFunction,
    a: &HermitianOperator,
    k: &HermitianOperator,
    m: usize,
    direction: &HermitianOperator,
) -> Result<(f64, Vec<f64>)> {
    let ac = truncate_spectrum(a, 2.0)?;
    let r = direction.scale(1.0 / schatten(direction, SchattenIndex::ONE)?.max(f64::MIN_POSITIVE));
    let integral =
        |b: &HermitianOperator| moi_eval(&MoiProblem::uniform(f.clone(), &eigh(b)?, k, m)?);
    let ea = eigh(&ac)?;
    let (lo, hi) = (ea.eigenvalues[0] - 1.0, ea.eigenvalues[ea.dim() - 1] + 1.0);
    let mut sup: f64 = 0.0;
    for i in 0..=4096 {
        sup = sup.max(f.deriv(m + 1, lo + (hi - lo) * i as f64 / 4096.0)?.abs());
    }
    let scale = sup * schatten(k, SchattenIndex::INFINITY)?.powi(m as i32);
    let base = integral(&ac)?;
    let residuals = (4..=20)
        .map(|j| {
            let moved = ac.add_scaled(&r, 2f64.powi(-j))?;
            trace_norm(&(&integral(&moved)? - &base))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((scale, residuals))
}

pub(crate) fn check_continuity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "continuity";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        match draw(seed, dim, cfg.ensemble) {
            Ok(inst) => {
                let dir = random_direction(seed, dim);
                functions(cfg)
                    .iter()
                    .map(|f| {
                        let print = fp(seed, dim, Some(m), Some(f.label()));
                        single(cfg, name, SRC_CONTINUITY, print, Some(&inst), None, || {
                            let (scale, r) = continuity_residuals(f, &inst.a, &inst.k, m, &dir)?;
                            let last = r[r.len() - 1] / if scale > 0.0 { scale } else { 1.0 };
                            if r.iter().all(|&v| v == 0.0) {
                                return Ok((0.0, Some("all residuals exactly zero".into())));
                            }
                            if !strictly_decreasing(&r) {
                                return Ok((
                                    f64::INFINITY,
                                    Some(format!("residuals not strictly decreasing: {}", sci(&r))),
                                ));
                            }
                            Ok((last, Some(format!("Lipschitz scale {scale:.4e}"))))
                        })
                    })
                    .collect()
            }
            Err(e) => errored_all(cfg, name, SRC_CONTINUITY, seed, dim, Some(m), &e),
        }
    })
}

pub(crate) fn check_homogeneity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        match draw(seed, dim, cfg.ensemble) {
            Ok(inst) => per_function(
                cfg,
                "homogeneity",
                SRC_FLOAT,
                seed,
                dim,
                Some(m),
                Some(&inst),
                None,
                |f| {
                    let base = derivative(f, &inst.a, &inst.k, m, 0.0)?;
                    let mut worst: f64 = 0.0;
                    for c in [2.0, 1.0 / 3.0] {
                        let scaled = derivative(f, &inst.a, &inst.k.scale(c), m, 0.0)?;
                        let want = base.scale(f64::powi(c, m as i32));
                        worst = worst.max(scaled.max_abs_diff(&want) / (1.0 + want.max_abs()));
                    }
                    Ok(worst)
                },
            ),
            Err(e) => errored_all(cfg, "homogeneity", SRC_FLOAT, seed, dim, Some(m), &e),
        }
    })
}

pub(crate) fn check_trace_derivative(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        match draw(seed, dim, cfg.ensemble) {
            Ok(inst) => per_function(
                cfg,
                "trace_derivative",
                SRC_EIGEN,
                seed,
                dim,
                Some(m),
                Some(&inst),
                None,
                |f| {
                    let full = derivative(f, &inst.a, &inst.k, m, cfg.t)?.trace().re;
                    Ok(rel(trace_derivative(f, &inst.a, &inst.k, m, cfg.t)?, full))
                },
            ),
            Err(e) => errored_all(cfg, "trace_derivative", SRC_EIGEN, seed, dim, Some(m), &e),
        }
    })
}

/// Jointly diagonal pair for the atom example: the configured ensemble when it
/// is diagonal or zero, a commuting pair otherwise.
fn example_instance(seed: u64, dim: usize, ensemble: Ensemble) -> Result<Instance> {
    match ensemble {
        Ensemble::Diagonal => draw(seed, dim, Ensemble::Diagonal),
        Ensemble::Zero => {
            let mut inst = draw(seed, dim, Ensemble::Diagonal)?;
            inst.k = HermitianOperator::zeros(dim);
            if let Some((_, lambda)) = inst.joint_spectra.as_mut() {
                lambda.iter_mut().for_each(|l| *l = 0.0);
            }
            Ok(inst)
        }
        _ => draw(seed, dim, Ensemble::CommutingPair),
    }
}

/// Max location/weight error between `ν_t` and `{(α_j + tλ_j, λ_j^m)}`, with
/// any non-atomic mass counted as error.
pub fn example_residual(inst: &Instance, m: usize, t: f64) -> Result<(f64, ShiftMeasure)> {
    let (alpha, lambda) = inst
        .joint_spectra
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("example needs a jointly diagonal pair".into()))?;
    let measure = nu(&inst.a, &inst.k, m, t)?;
    let mut want: Vec<(f64, f64)> = alpha
        .iter()
        .zip(lambda)
        .filter(|(_, &l)| l != 0.0)
        .map(|(&a, &l)| (a + t * l, l.powi(m as i32)))
        .collect();
    want.sort_by(|x, y| x.0.total_cmp(&y.0));
    let got = measure.atoms();
    if got.len() != want.len() {
        return Ok((f64::INFINITY, measure));
    }
    let atom_err = got
        .iter()
        .zip(&want)
        .map(|(g, w)| (g.0 - w.0).abs().max((g.1 - w.1).abs()))
        .fold(0.0, f64::max);
    Ok((atom_err.max(measure.without_atoms().weight_norm()), measure))
}

pub(crate) fn check_example(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "example";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let print = fp(seed, dim, Some(m), None);
        let inst = match example_instance(seed, dim, cfg.ensemble) {
            Ok(i) => i,
            Err(e) => {
                return vec![PropertyResult::errored(
                    name,
                    print,
                    cfg.tolerance(name),
                    SRC_EIGEN,
                    &e,
                )]
            }
        };
        let computed = example_residual(&inst, m, cfg.t);
        let measure = computed.as_ref().ok().map(|c| c.1.clone());
        vec![single(
            cfg,
            name,
            SRC_EIGEN,
            print,
            Some(&inst),
            measure.as_ref(),
            || {
                let (r, mu) = computed?;
                let note = (!r.is_finite())
                    .then(|| format!("atom count {} differs from expected", mu.atoms().len()));
                Ok((r, note))
            },
        )]
    })
}

pub(crate) fn check_nu_identity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "nu_identity";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let prepared = draw(seed, dim, cfg.ensemble).and_then(|inst| {
            let measure = nu(&inst.a, &inst.k, m, cfg.t)?;
            Ok((inst, measure))
        });
        match prepared {
            Ok((inst, measure)) => per_function(
                cfg,
                name,
                SRC_KERNEL,
                seed,
                dim,
                Some(m),
                Some(&inst),
                Some(&measure),
                |f| {
                    let want = trace_derivative(f, &inst.a, &inst.k, m, cfg.t)?;
                    Ok(rel(integrate(&measure, &f.derivative(m)?), want))
                },
            ),
            Err(e) => errored_all(cfg, name, SRC_KERNEL, seed, dim, Some(m), &e),
        }
    })
}

pub(crate) fn check_nu_mass(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "nu_mass";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let print = fp(seed, dim, Some(m), None);
        let inst = match draw(seed, dim, cfg.ensemble) {
            Ok(i) => i,
            Err(e) => {
                return vec![PropertyResult::errored(
                    name,
                    print,
                    cfg.tolerance(name),
                    SRC_FLOAT,
                    &e,
                )]
            }
        };
        let measure = nu(&inst.a, &inst.k, m, cfg.t);
        vec![single(
            cfg,
            name,
            SRC_FLOAT,
            print,
            Some(&inst),
            measure.as_ref().ok(),
            || {
                let mut power = inst.k.matrix().clone();
                for _ in 1..m {
                    power = power.matmul(inst.k.matrix());
                }
                Ok((
                    rel(
                        measure.as_ref().map_err(Clone::clone)?.total_mass(),
                        power.trace().re,
                    ),
                    None,
                ))
            },
        )]
    })
}

fn factorial(k: usize) -> f64 {
    (2..=k).map(|i| i as f64).product()
}

/// Worst `|[x] f - (1/m!) ∫ f^{(m)} M_x| / (1 + |[x] f|)` over `pairs` random
/// draws of corpus member, order `m ≤ 4` and nodes (with repeats and near-repeats).
pub fn divdiff_oracle_residual(seed: u64, pairs: usize) -> Result<f64> {
    let fs = corpus(4);
    let mut rng = SplitMix64::stream(seed, 0xD1D1);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let m = 1 + rng.below(4);
        let candidates: Vec<&SmoothFunction> = fs.iter().filter(|f| f.k_max() >= m).collect();
        let f = candidates[rng.below(candidates.len())];
        let mut x: Vec<f64> = Vec::with_capacity(m + 1);
        for _ in 0..=m {
            let v = match rng.below(4) {
                0 if !x.is_empty() => x[rng.below(x.len())],
                1 if !x.is_empty() => x[rng.below(x.len())] + 1e-6 * rng.normal(),
                _ => rng.uniform_in(-3.0, 3.0),
            };
            x.push(v);
        }
        let nodes = NodeMultiset::new(&x);
        let value = divided_difference(f, &nodes)?;
        let oracle = kernel_integrate(&peano_kernel(&nodes), &f.derivative(m)?) / factorial(m);
        worst = worst.max((value - oracle).abs() / (1.0 + value.abs()));
    }
    Ok(worst)
}

pub(crate) fn check_divdiff_oracle(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    per_job(&cfg.seeds, |&seed| {
        let print = Fingerprint::new(seed, None, None, None);
        vec![single(
            cfg,
            "divdiff_oracle",
            SRC_KERNEL,
            print,
            None,
            None,
            || {
                Ok((
                    divdiff_oracle_residual(seed, cfg.divdiff_pairs)?,
                    Some(format!("{} random pairs", cfg.divdiff_pairs)),
                ))
            },
        )]
    })
}

/// Sup-norm distance between the bin densities of the pushforward `η_1` and
/// the counting shift function, on a grid covering both.
pub fn eta_xi_discrepancy(
    a: &HermitianOperator,
    k: &HermitianOperator,
    opts: &QuadratureOptions,
) -> Result<(f64, ShiftMeasure)> {
    let opts = opts.clone().with_realization(Realization::Pushforward);
    let e1 = eta(a, k, 1, &opts)?;
    let xi = xi_counting(a, k)?;
    let lo = [e1.support(), xi.support()]
        .iter()
        .flatten()
        .map(|s| s.0)
        .fold(0.0, f64::min);
    let hi = [e1.support(), xi.support()]
        .iter()
        .flatten()
        .map(|s| s.1)
        .fold(0.0, f64::max);
    let grid = UniformGrid::new(lo - 1.0, hi + 1.0, DEFAULT_BINS)?;
    let d1 = grid_density(&e1, &grid)?;
    let d2 = grid_density(&xi, &grid)?;
    let sup = d1
        .iter()
        .zip(&d2)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok((sup, e1))
}

pub(crate) fn check_eta_xi(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "eta_xi";
    per_job(&seed_dims(cfg), |&(seed, dim)| {
        let print = fp(seed, dim, Some(1), None);
        let inst = match draw(seed, dim, cfg.ensemble) {
            Ok(i) => i,
            Err(e) => {
                return vec![PropertyResult::errored(
                    name,
                    print,
                    cfg.tolerance(name),
                    SRC_GRID,
                    &e,
                )]
            }
        };
        let computed = eta_xi_discrepancy(&inst.a, &inst.k, &cfg.quadrature);
        let measure = computed.as_ref().ok().map(|c| c.1.clone());
        vec![single(
            cfg,
            name,
            SRC_GRID,
            print,
            Some(&inst),
            measure.as_ref(),
            || Ok((computed?.0, None)),
        )]
    })
}

pub(crate) fn check_absolute_continuity(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "absolute_continuity";
    let opts = cfg
        .quadrature
        .clone()
        .with_realization(Realization::Pushforward);
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let print = fp(seed, dim, Some(m), None);
        let inst = match draw(seed, dim, cfg.ensemble) {
            Ok(i) => i,
            Err(e) => {
                return vec![PropertyResult::errored(
                    name,
                    print,
                    cfg.tolerance(name),
                    SRC_FLOAT,
                    &e,
                )]
            }
        };
        let measure = eta(&inst.a, &inst.k, m, &opts);
        vec![single(
            cfg,
            name,
            SRC_FLOAT,
            print,
            Some(&inst),
            measure.as_ref().ok(),
            || {
                Ok((
                    measure.as_ref().map_err(Clone::clone)?.atom_fraction(),
                    Some("atom mass fraction of the pushforward η_m".into()),
                ))
            },
        )]
    })
}

fn deterministic(seed: u64) -> Fingerprint {
    Fingerprint::new(seed, None, None, None)
}

pub(crate) fn check_besov_sin(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let f = SmoothFunction::sine(1.0, 0.0).with_label("sin");
    let print = Fingerprint::new(0, None, Some(1), Some("sin"));
    vec![single(
        cfg,
        "besov_sin",
        SRC_BESOV,
        print,
        None,
        None,
        || {
            let s = besov_seminorm_diff(&f, 1, &cfg.besov)?;
            let target = 2.0 * std::f64::consts::PI;
            Ok((
                (s.value - target).abs() / target,
                Some(format!("seminorm {:.10}", s.value)),
            ))
        },
    )]
}

pub(crate) fn check_besov_partition(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let w = make_window();
    vec![single(
        cfg,
        "besov_partition",
        SRC_WINDOW,
        deterministic(0),
        None,
        None,
        || {
            let worst = (0..=4000)
                .map(|i| 2f64.powf(-10.0 + 20.0 * i as f64 / 4000.0))
                .map(|x| (w.partition_sum(x) - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((
                worst,
                Some("dyadic windows summed at 4001 points of [2^-10, 2^10]".into()),
            ))
        },
    )]
}

/// `max_σ |trace D^m f_σ(A)[K]| / (σ^m ‖f_σ‖_∞ ‖K‖^m_{S_m})` over the Fejér
/// kernels `σ ∈ {1, 2, 4, 8}` (each with sup norm 1).
pub fn bandlimit_ratio(a: &HermitianOperator, k: &HermitianOperator, m: usize) -> Result<Vec<f64>> {
    let norm = schatten(k, SchattenIndex::new(m as f64)?)?;
    [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&sigma| {
            if norm == 0.0 {
                return Ok(0.0);
            }
            let f = SmoothFunction::fejer(sigma);
            let t = trace_derivative(&f, a, k, m, 0.0)?;
            Ok(t.abs() / (f64::powi(sigma, m as i32) * norm.powi(m as i32)))
        })
        .collect()
}

pub(crate) fn check_besov_bandlimit(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let name = "besov_bandlimit";
    per_job(&seed_dim_orders(cfg), |&(seed, dim, m)| {
        let print = fp(seed, dim, Some(m), Some("fejer"));
        let inst = draw(seed, dim, cfg.ensemble);
        vec![single(
            cfg,
            name,
            SRC_BANDLIMIT,
            print,
            inst.as_ref().ok(),
            None,
            || {
                let inst = inst.clone()?;
                let ratios = bandlimit_ratio(&inst.a, &inst.k, m)?;
                let worst = ratios.iter().cloned().fold(0.0, f64::max);
                Ok((
                    worst,
                    Some(format!("ratios over σ = 1, 2, 4, 8: {ratios:.4?}")),
                ))
            },
        )]
    })
}

pub(crate) fn run_check(cfg: &SuiteConfig, name: &str) -> Vec<PropertyResult> {
    match name {
        "krein" => check_krein(cfg),
        "taylor" => check_taylor(cfg),
        "taylor_refinement" => check_taylor_refinement(cfg),
        "koplienko" => check_koplienko(cfg),
        "taylor_identity" => check_taylor_identity(cfg),
        "fd_identity" => check_fd_identity(cfg),
        "fd_trace" => check_fd_trace(cfg),
        "limit" => check_limit(cfg),
        "continuity" => check_continuity(cfg),
        "homogeneity" => check_homogeneity(cfg),
        "trace_derivative" => check_trace_derivative(cfg),
        "example" => check_example(cfg),
        "nu_identity" => check_nu_identity(cfg),
        "nu_mass" => check_nu_mass(cfg),
        "divdiff_oracle" => check_divdiff_oracle(cfg),
        "eta_xi" => check_eta_xi(cfg),
        "absolute_continuity" => check_absolute_continuity(cfg),
        "besov_sin" => check_besov_sin(cfg),
        "besov_partition" => check_besov_partition(cfg),
        "besov_bandlimit" => check_besov_bandlimit(cfg),
        other => unreachable!("unknown check `{other}`"),
    }
}
