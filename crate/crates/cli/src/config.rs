use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shiftlab::besov::BesovConfig;
use shiftlab::shift::{QuadratureOptions, Realization, UniformGrid};
use shiftlab::verify::SuiteConfig;

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Xi,
    Eta,
    Kappa,
    Nu,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizationArg {
    Quadrature,
    Pushforward,
}

impl From<RealizationArg> for Realization {
    fn from(r: RealizationArg) -> Self {
        match r {
            RealizationArg::Quadrature => Realization::Quadrature,
            RealizationArg::Pushforward => Realization::Pushforward,
        }
    }
}

/// Run parameters. Each flag has a config-file field of the same name; flags win.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Measure to compute (shift)
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,

    /// Matrix file for A
    #[arg(long = "A", value_name = "PATH")]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<PathBuf>,

    /// Matrix file for the perturbation K
    #[arg(long = "K", value_name = "PATH")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<PathBuf>,

    /// Order
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,

    /// Time (nu) or evaluation point s (derivative)
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t_range")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,

    /// Sweep a:b:n (derivative)
    #[arg(long = "t-range", value_name = "A:B:N", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_range: Option<String>,

    /// Corpus function label
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,

    /// Density grid lo:hi:bins (shift)
    #[arg(long, value_name = "LO:HI:BINS", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Seed override (verify)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Representation of the time-aggregated measure (shift)
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<RealizationArg>,

    /// Discrete time measure t:w,t:w,... (shift --kind psi)
    #[arg(long, value_name = "T:W,...", allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<String>,

    /// Derivative order inside the point-mass functional (shift --kind psi)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,

    /// Caps the derivative order available from the function
    #[arg(long = "deriv-order")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deriv_order: Option<usize>,

    /// Config file supplying any subset of these fields
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureOptions>,

    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub besov: Option<BesovConfig>,

    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteConfig>,
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl RunConfig {
    /// Merges the config file named by `--config` under the flags.
    pub fn resolve(self) -> CliResult<RunConfig> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = read_text(&path)?;
        let file: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(RunConfig {
            kind: self.kind.or(file.kind),
            a: self.a.or(file.a),
            k: self.k.or(file.k),
            m: self.m.or(file.m),
            t: self
                .t
                .or(if self.t_range.is_some() { None } else { file.t }),
            t_range: self
                .t_range
                .or(if self.t.is_some() { None } else { file.t_range }),
            f: self.f.or(file.f),
            grid: self.grid.or(file.grid),
            out: self.out.or(file.out),
            seed: self.seed.or(file.seed),
            realization: self.realization.or(file.realization),
            points: self.points.or(file.points),
            m0: self.m0.or(file.m0),
            deriv_order: self.deriv_order.or(file.deriv_order),
            config: Some(path),
            quadrature: file.quadrature,
            besov: file.besov,
            suite: file.suite,
        })
    }

    /// SHA-256 of the effective configuration as canonical JSON.
    pub fn hash(&self, command: &str) -> String {
        let body = serde_json::json!({ "command": command, "config": self });
        let digest = Sha256::digest(body.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn require_m(&self) -> CliResult<usize> {
        let m = self.m.ok_or_else(|| usage("--m is required"))?;
        if !(1..=4).contains(&m) {
            return Err(usage(format!("--m must be in [1, 4], got {m}")));
        }
        Ok(m)
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        let mut q = self.quadrature.clone().unwrap_or_default();
        if let Some(r) = self.realization {
            q.realization = r.into();
        }
        q
    }
}

fn fields<'a>(text: &'a str, count: usize, what: &str, shape: &str) -> CliResult<Vec<&'a str>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != count {
        return Err(usage(format!(
            "{what} must look like {shape}, got `{text}`"
        )));
    }
    Ok(parts)
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: cannot parse `{s}`")))
}

pub fn parse_grid(text: &str) -> CliResult<UniformGrid> {
    let p = fields(text, 3, "--grid", "lo:hi:bins")?;
    Ok(UniformGrid::new(
        number(p[0], "--grid")?,
        number(p[1], "--grid")?,
        number(p[2], "--grid")?,
    )?)
}

pub fn parse_range(text: &str) -> CliResult<Vec<f64>> {
    let p = fields(text, 3, "--t-range", "a:b:n")?;
    let (a, b): (f64, f64) = (number(p[0], "--t-range")?, number(p[1], "--t-range")?);
    let n: usize = number(p[2], "--t-range")?;
    if n == 0 {
        return Err(usage("--t-range needs n ≥ 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

pub fn parse_points(text: &str) -> CliResult<Vec<(f64, f64)>> {
    text.split(',')
        .map(|pair| {
            let p = fields(pair.trim(), 2, "--points", "t:w,t:w,...")?;
            Ok((number(p[0], "--points")?, number(p[1], "--points")?))
        })
        .collect()
}
