use serde_json::{json, Value};
use shiftlab::besov::{besov_seminorm_diff, besov_seminorm_lp, labels, member, SmoothFunction};
use shiftlab::matcore::{eigh, schatten, HermitianOperator, MatrixFile, SchattenIndex};
use shiftlab::moi::{derivative as derivative_matrix, taylor_remainder_paths};
use shiftlab::shift::{
    atoms_json, eta, grid_density, kappa, nu, psi_general, xi_counting, DiscreteTimeMeasure,
    ShiftMeasure, UniformGrid,
};
use shiftlab::verify::{run_suite, SuiteConfig};

use crate::config::{parse_grid, parse_points, parse_range, read_text, Kind, RunConfig};
use crate::error::{usage, CliError, CliResult};
use crate::output::{file_stem, float, OutDir, Provenance};

/// Verdict of a run that reached the end without a usage or I/O error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    PropertyFailure,
}

fn load_matrix(cfg: &RunConfig, which: &str) -> CliResult<HermitianOperator> {
    let path = match which {
        "A" => &cfg.a,
        _ => &cfg.k,
    }
    .as_ref()
    .ok_or_else(|| usage(format!("--{which} is required")))?;
    let text = read_text(path)?;
    let matrix = MatrixFile::parse(&text).map_err(|e| CliError::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    HermitianOperator::new(matrix).map_err(|e| CliError::Parse {
        path: path.clone(),
        message: e.to_string(),
    })
}

fn load_pair(cfg: &RunConfig) -> CliResult<(HermitianOperator, HermitianOperator)> {
    let a = load_matrix(cfg, "A")?;
    let k = load_matrix(cfg, "K")?;
    if a.dim() != k.dim() {
        return Err(usage(format!(
            "A is {0}×{0} but K is {1}×{1}",
            a.dim(),
            k.dim()
        )));
    }
    Ok((a, k))
}

fn function(cfg: &RunConfig) -> CliResult<SmoothFunction> {
    let label = cfg.f.as_deref().ok_or_else(|| usage("--f is required"))?;
    let f = member(label).ok_or_else(|| {
        usage(format!(
            "unknown function `{label}`; known: {}, x^k",
            labels().join(", ")
        ))
    })?;
    Ok(match cfg.deriv_order {
        Some(cap) => {
            let available = f.k_max();
            f.with_k_max(cap.min(available))
        }
        None => f,
    })
}

/// Default grid, or the requested one widened to the support with a warning.
fn grid_for(
    cfg: &RunConfig,
    measure: &ShiftMeasure,
    a: &HermitianOperator,
    k_norm: f64,
    m: usize,
) -> CliResult<UniformGrid> {
    let mut grid = match &cfg.grid {
        Some(spec) => parse_grid(spec)?,
        None => UniformGrid::covering(&eigh(a)?.eigenvalues, k_norm, m.max(1)),
    };
    if let Some((lo, hi)) = measure.support() {
        if !grid.covers(lo, hi) {
            let width = grid.width();
            let new_lo = grid.lo.min(lo - width);
            let new_hi = grid.hi.max(hi + width);
            let bins = ((new_hi - new_lo) / width).ceil() as usize;
            if cfg.grid.is_some() {
                eprintln!(
                    "warning: grid [{}, {}] does not cover the support [{lo}, {hi}]; expanded to [{new_lo}, {new_hi}] with {bins} bins",
                    grid.lo, grid.hi
                );
            }
            grid = UniformGrid::new(new_lo, new_hi, bins)?;
        }
    }
    Ok(grid)
}

pub fn shift(cfg: &RunConfig) -> CliResult<Outcome> {
    let kind = cfg
        .kind
        .ok_or_else(|| usage("--kind is required (xi, eta, kappa, nu, psi)"))?;
    let m = match kind {
        Kind::Xi => match cfg.m {
            None | Some(1) => 1,
            Some(m) => return Err(usage(format!("--kind xi has order 1, got --m {m}"))),
        },
        _ => cfg.require_m()?,
    };
    let (a, k) = load_pair(cfg)?;
    let opts = cfg.quadrature();
    let t = cfg.t.unwrap_or(0.0);
    let measure = match kind {
        Kind::Xi => xi_counting(&a, &k)?,
        Kind::Eta => eta(&a, &k, m, &opts)?,
        Kind::Kappa => kappa(&a, &k, m, &opts)?,
        Kind::Nu => nu(&a, &k, m, t)?,
        Kind::Psi => {
            let spec = cfg
                .points
                .as_deref()
                .ok_or_else(|| usage("--kind psi needs --points t:w,..."))?;
            let points = DiscreteTimeMeasure::new(parse_points(spec)?);
            psi_general(&a, &k, m, &points, cfg.m0.unwrap_or(0), &opts)?
        }
    };
    let k_norm = schatten(&k, SchattenIndex::INFINITY)?;
    let grid = grid_for(cfg, &measure, &a, k_norm, m)?;
    let density = grid_density(&measure, &grid)?;

    let kind_name = serde_json::to_value(kind).expect("kind serializes");
    let kind_name = kind_name.as_str().expect("kind is a string");
    let stem = if kind == Kind::Xi {
        kind_name.to_string()
    } else {
        format!("{kind_name}_m{m}")
    };
    let prov = Provenance::new("shift", cfg, Vec::new());
    let summary = vec![
        format!("kind: {kind_name}"),
        format!("m: {m}"),
        format!("total_mass: {}", float(measure.total_mass())),
        format!("atom_mass: {}", float(measure.atom_mass())),
        format!("grid: {}:{}:{}", float(grid.lo), float(grid.hi), grid.bins),
    ];
    let rows: Vec<Vec<f64>> = grid
        .centers()
        .into_iter()
        .zip(density)
        .map(|(x, d)| vec![x, d])
        .collect();

    let mut out = OutDir::new(cfg.out_dir())?;
    out.csv(&format!("{stem}.csv"), &prov, &summary, "x,density", &rows)?;
    let atoms: Value = serde_json::from_str(&atoms_json(&measure)).expect("atoms json parses");
    out.json(
        &format!("{stem}_atoms.json"),
        &prov.attach(json!({ "atoms": atoms })),
    )?;
    let uses_time_rule = matches!(kind, Kind::Eta | Kind::Kappa | Kind::Psi);
    let record = json!({
        "kind": kind_name,
        "m": m,
        "t": if kind == Kind::Nu { Some(t) } else { None },
        "quadrature": if uses_time_rule { Some(&opts) } else { None },
        "total_mass": measure.total_mass(),
        "atom_mass": measure.atom_mass(),
        "atom_count": measure.atoms().len(),
        "kernel_count": measure.splines().len(),
        "support": measure.support(),
        "grid": grid,
    });
    out.json(&format!("{stem}_provenance.json"), &prov.attach(record))?;
    report_written(&out);
    Ok(Outcome::Success)
}

pub fn derivative(cfg: &RunConfig) -> CliResult<Outcome> {
    let m = cfg.require_m()?;
    let f = function(cfg)?;
    let (a, k) = load_pair(cfg)?;
    let prov = Provenance::new("derivative", cfg, Vec::new());
    let stem = format!("derivative_{}_m{m}", file_stem(f.label()));
    let mut out = OutDir::new(cfg.out_dir())?;
    match &cfg.t_range {
        Some(spec) => {
            let rows = parse_range(spec)?
                .into_iter()
                .map(|s| Ok(vec![s, derivative_matrix(&f, &a, &k, m, s)?.trace().re]))
                .collect::<CliResult<Vec<_>>>()?;
            out.csv(
                &format!("{stem}_trace.csv"),
                &prov,
                &[format!("m: {m}"), format!("f: {}", f.label())],
                "s,trace",
                &rows,
            )?;
        }
        None => {
            let s = cfg.t.unwrap_or(0.0);
            let d = derivative_matrix(&f, &a, &k, m, s)?;
            let trace = d.trace();
            let mut value =
                serde_json::to_value(MatrixFile::from_matrix(&d)).expect("matrix serializes");
            value["s"] = json!(s);
            value["trace"] = json!({ "re": trace.re, "im": trace.im });
            out.json(&format!("{stem}.json"), &prov.attach(value))?;
            println!("trace = {}", float(trace.re));
        }
    }
    report_written(&out);
    Ok(Outcome::Success)
}

pub fn taylor(cfg: &RunConfig) -> CliResult<Outcome> {
    let m = cfg.require_m()?;
    let f = function(cfg)?;
    let (a, k) = load_pair(cfg)?;
    let paths = taylor_remainder_paths(&f, &a, &k, m)?;
    let prov = Provenance::new("taylor", cfg, Vec::new());
    let stem = format!("taylor_{}_m{m}", file_stem(f.label()));
    let mut out = OutDir::new(cfg.out_dir())?;
    let as_json =
        |matrix| serde_json::to_value(MatrixFile::from_matrix(matrix)).expect("matrix serializes");
    out.json(
        &format!("{stem}_moi.json"),
        &prov.attach(as_json(&paths.moi)),
    )?;
    out.json(
        &format!("{stem}_direct.json"),
        &prov.attach(as_json(&paths.direct)),
    )?;
    let frobenius = paths.frobenius_residual();
    let norm = paths.direct.frobenius();
    let residual = json!({
        "frobenius_residual": frobenius,
        "max_residual": paths.max_residual(),
        "direct_frobenius_norm": norm,
        "relative_residual": frobenius / (1.0 + norm),
    });
    out.json(&format!("{stem}_residual.json"), &prov.attach(residual))?;
    println!("frobenius residual = {}", float(frobenius));
    report_written(&out);
    Ok(Outcome::Success)
}

pub fn besov(cfg: &RunConfig) -> CliResult<Outcome> {
    let m = cfg.m.unwrap_or(1);
    if !(1..=4).contains(&m) {
        return Err(usage(format!("--m must be in [1, 4], got {m}")));
    }
    let f = function(cfg)?;
    let bcfg = cfg.besov.clone().unwrap_or_default();
    let diff = besov_seminorm_diff(&f, m, &bcfg);
    let lp = besov_seminorm_lp(&f, m, &bcfg);
    if let (Err(d), Err(l)) = (&diff, &lp) {
        return Err(usage(format!(
            "no seminorm is defined for `{}`: {d}; {l}",
            f.label()
        )));
    }
    let prov = Provenance::new("besov", cfg, Vec::new());
    let stem = format!("besov_{}_m{m}", file_stem(f.label()));
    let mut out = OutDir::new(cfg.out_dir())?;
    let diff_value = match &diff {
        Ok(d) => json!({ "value": d.value, "caveat": d.caveat }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let lp_value = match &lp {
        Ok(l) => json!({ "value": l.value, "rows": l.rows.len() }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    out.json(
        &format!("{stem}.json"),
        &prov.attach(
            json!({ "f": f.label(), "m": m, "config": bcfg, "diff": diff_value, "lp": lp_value }),
        ),
    )?;
    if let Ok(l) = &lp {
        let rows: Vec<Vec<f64>> = l
            .rows
            .iter()
            .map(|r| vec![r.n as f64, r.sup_norm, r.weighted])
            .collect();
        out.csv(
            &format!("{stem}_lp.csv"),
            &prov,
            &[format!("m: {m}"), format!("f: {}", f.label())],
            "n,sup_norm,weighted",
            &rows,
        )?;
    }
    match &diff {
        Ok(d) => {
            println!("diff seminorm = {}", float(d.value));
            if let Some(c) = &d.caveat {
                println!("caveat: {c}");
            }
        }
        Err(e) => println!("diff seminorm: {e}"),
    }
    match &lp {
        Ok(l) => println!("lp seminorm = {}", float(l.value)),
        Err(e) => println!("lp seminorm: {e}"),
    }
    report_written(&out);
    Ok(Outcome::Success)
}

pub fn verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut suite: SuiteConfig = cfg.suite.clone().unwrap_or_default();
    if let Some(seed) = cfg.seed {
        suite.seeds = vec![seed];
    }
    let mut out = OutDir::new(cfg.out_dir())?;
    if suite.artifact_dir.is_none() {
        suite.artifact_dir = Some(out.path().join("artifacts"));
    }
    suite
        .validate()
        .map_err(|e| usage(format!("invalid suite config: {e}")))?;
    let report = run_suite(&suite)?;
    let prov = Provenance::new("verify", cfg, suite.seeds.clone());
    let value = serde_json::to_value(&report).expect("report serializes");
    out.json("verify_report.json", &prov.attach(value))?;
    for r in report
        .results
        .iter()
        .filter(|r| r.status == shiftlab::verify::Status::Fail)
    {
        eprintln!(
            "FAIL {} seed={} dim={:?} m={:?} f={:?} residual={:?} tolerance={:e}",
            r.name,
            r.fingerprint.seed,
            r.fingerprint.dim,
            r.fingerprint.m,
            r.fingerprint.f,
            r.residual,
            r.tolerance
        );
    }
    println!(
        "pass {} fail {} skip {}",
        report.summary.pass, report.summary.fail, report.summary.skip
    );
    report_written(&out);
    Ok(if report.all_pass() {
        Outcome::Success
    } else {
        Outcome::PropertyFailure
    })
}

fn report_written(out: &OutDir) {
    for p in out.written() {
        println!("wrote {}", p.display());
    }
}
