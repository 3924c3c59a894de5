//! Acceptance criteria at their stated tolerances, one line per criterion.
//!
//! Criterion 7 is known to be unattainable for the m = 3 instances of the
//! default ensemble (see the project's decisions ledger). It is still run and
//! reported as FAIL. The run aborts only if it fails in any other way.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use serde_json::Value;
use shiftlab::besov::member;
use shiftlab::verify::{
    draw, limit_errors, run_suite, Ensemble, PropertyResult, Report, Status, SuiteConfig,
};

const KNOWN_UNATTAINABLE: &[usize] = &[7];

struct Verdict {
    pass: bool,
    detail: String,
}

fn suite(only: &[&str], tweak: impl FnOnce(&mut SuiteConfig)) -> Report {
    let mut cfg = SuiteConfig {
        only: only.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    tweak(&mut cfg);
    run_suite(&cfg).expect("suite runs")
}

fn results<'a>(report: &'a Report, check: &str) -> Vec<&'a PropertyResult> {
    report.results.iter().filter(|r| r.name == check).collect()
}

/// Every result of every named check passes; detail gives counts and the worst residual.
fn judge(report: &Report, checks: &[&str]) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for check in checks {
        let rs = results(report, check);
        let passed = rs.iter().filter(|r| r.status == Status::Pass).count();
        let worst = rs.iter().filter_map(|r| r.residual).fold(0.0f64, f64::max) + 0.0;
        let failed = rs.iter().filter(|r| r.status != Status::Pass).count();
        pass &= !rs.is_empty() && failed == 0;
        let tol = rs.first().map_or(f64::NAN, |r| r.tolerance);
        parts.push(format!(
            "{check} {passed}/{} worst {worst:.3e} (tol {tol:.3e})",
            rs.len()
        ));
    }
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

fn krein() -> Verdict {
    let r = suite(&["krein"], |c| {
        c.dims = vec![2, 4, 6, 8];
        c.seeds = (101..=105).collect();
    });
    judge(&r, &["krein"])
}

fn order_m_trace() -> Verdict {
    let r = suite(&["taylor", "taylor_refinement"], |c| c.dims = vec![2, 4, 6]);
    judge(&r, &["taylor", "taylor_refinement"])
}

fn koplienko() -> Verdict {
    judge(&suite(&["koplienko"], |_| {}), &["koplienko"])
}

fn taylor_identity() -> Verdict {
    judge(&suite(&["taylor_identity"], |_| {}), &["taylor_identity"])
}

fn fd_identity() -> Verdict {
    judge(&suite(&["fd_identity"], |_| {}), &["fd_identity"])
}

fn fd_trace() -> Verdict {
    judge(&suite(&["fd_trace"], |_| {}), &["fd_trace"])
}

/// Least-squares slope of log error against log h over the given points.
fn slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Judged by the criterion's own terms: monotone decrease and fitted slope ≥ 0.9.
/// The suite check also bounds the terminal/initial ratio; results failing only
/// that bound are counted separately. The second value flags failures outside
/// the analysed mode: monotone errors, m = 3, first-order decay on the fine half
/// of the h range.
fn limit() -> (Verdict, bool) {
    let cfg = SuiteConfig::default();
    let r = suite(&["limit"], |_| {});
    let all = results(&r, "limit");
    let mut criterion_failures = 0;
    let mut ratio_only = 0;
    let mut unexpected = false;
    let mut tail_slopes = Vec::new();
    for f in all.iter().filter(|r| r.status != Status::Pass) {
        let note = f.note.as_deref().unwrap_or("");
        if f.residual.is_some_and(f64::is_finite) {
            ratio_only += 1;
            continue;
        }
        criterion_failures += 1;
        let (seed, dim, m) = (
            f.fingerprint.seed,
            f.fingerprint.dim.unwrap(),
            f.fingerprint.m.unwrap(),
        );
        let label = f.fingerprint.f.clone().unwrap_or_default();
        if m != 3 || !note.starts_with("slope below 0.9") {
            unexpected = true;
            continue;
        }
        let inst = draw(seed, dim, cfg.ensemble).expect("instance");
        let errors =
            limit_errors(&member(&label).expect("corpus"), &inst.a, &inst.k, m).expect("errors");
        let tail = slope(&errors[3..]);
        unexpected |= tail < 0.9;
        tail_slopes.push(tail);
    }
    let mut detail = format!(
        "{}/{} monotone with slope ≥ 0.9; {ratio_only} more miss only the suite's terminal/initial bound",
        all.len() - criterion_failures,
        all.len()
    );
    if !tail_slopes.is_empty() {
        let lo = tail_slopes.iter().cloned().fold(f64::INFINITY, f64::min);
        detail.push_str(&format!("; the {criterion_failures} failing m = 3 cases have slope ≥ {lo:.3} over h = 2^-6..2^-10"));
    }
    let verdict = Verdict {
        pass: !all.is_empty() && criterion_failures == 0,
        detail,
    };
    (verdict, unexpected)
}

fn example() -> Verdict {
    let commuting = suite(&["example"], |c| c.ensemble = Ensemble::CommutingPair);
    let diagonal = suite(&["example"], |c| c.ensemble = Ensemble::Diagonal);
    let a = judge(&commuting, &["example"]);
    let b = judge(&diagonal, &["example"]);
    Verdict {
        pass: a.pass && b.pass,
        detail: format!("commuting_pair: {}; diagonal: {}", a.detail, b.detail),
    }
}

fn exact_structure() -> Verdict {
    let r = suite(&["homogeneity", "nu_mass", "divdiff_oracle"], |_| {});
    let pairs = SuiteConfig::default().divdiff_pairs * SuiteConfig::default().seeds.len();
    let mut v = judge(&r, &["homogeneity", "nu_mass", "divdiff_oracle"]);
    v.pass &= pairs >= 1000;
    v.detail
        .push_str(&format!("; {pairs} divided-difference pairs"));
    v
}

fn eta_xi() -> Verdict {
    judge(&suite(&["eta_xi"], |c| c.dims = vec![6]), &["eta_xi"])
}

fn besov() -> Verdict {
    let checks = ["besov_sin", "besov_partition", "besov_bandlimit"];
    judge(&suite(&checks, |_| {}), &checks)
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut()
        .expect("report object")
        .remove("generated_at");
    v
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = serde_json::json!({
        "suite": { "dims": [2, 4], "orders": [1, 2, 3], "seeds": [11, 22], "divdiff_pairs": 50 }
    });
    fs::write(dir.path().join("run.json"), config.to_string()).expect("write config");
    let run = || -> Value {
        let status = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
            .args(["verify", "--config", "run.json", "--out", "out"])
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        assert!(status.status.code().is_some());
        let text = fs::read_to_string(dir.path().join("out/verify_report.json")).expect("report");
        serde_json::from_str(&text).expect("report parses")
    };
    let first = run();
    let second = run();
    let results = first["results"].as_array().map_or(0, Vec::len);
    let same = strip_timestamp(first) == strip_timestamp(second);
    Verdict {
        pass: same && results > 0,
        detail: format!("{results} results, reports identical modulo timestamp: {same}"),
    }
}

/// Id, title, and a runner returning the verdict plus an unexpected-failure flag.
type Criterion = (usize, &'static str, Box<dyn Fn() -> (Verdict, bool)>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (1, "Krein trace formula", Box::new(|| (krein(), false))),
        (
            2,
            "order-m trace formula with panel doubling",
            Box::new(|| (order_m_trace(), false)),
        ),
        (3, "Koplienko case", Box::new(|| (koplienko(), false))),
        (
            4,
            "Taylor remainder identity",
            Box::new(|| (taylor_identity(), false)),
        ),
        (
            5,
            "finite difference identity",
            Box::new(|| (fd_identity(), false)),
        ),
        (
            6,
            "finite difference trace formula",
            Box::new(|| (fd_trace(), false)),
        ),
        (7, "finite difference limit", Box::new(limit)),
        (8, "commuting example", Box::new(|| (example(), false))),
        (
            9,
            "exact structure",
            Box::new(|| (exact_structure(), false)),
        ),
        (
            10,
            "eta_1 against counting xi",
            Box::new(|| (eta_xi(), false)),
        ),
        (11, "Besov seminorms", Box::new(|| (besov(), false))),
        (12, "determinism", Box::new(|| (determinism(), false))),
    ];
    let mut blocking = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let (v, unexpected) = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = !v.pass && KNOWN_UNATTAINABLE.contains(&id);
        println!(
            "criterion {id:>2} {tag} {title}{}: {} [{:.1}s]",
            if known { " (known unattainable)" } else { "" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if (!v.pass && !known) || unexpected {
            blocking.push(id);
        }
    }
    if blocking.is_empty() {
        println!("acceptance: all criteria pass or fail only as documented");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: blocking failures in criteria {blocking:?}");
        ExitCode::FAILURE
    }
}
