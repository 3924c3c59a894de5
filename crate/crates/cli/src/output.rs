use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "shiftlab";

/// Header attached to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig, seeds: Vec<u64>) -> Self {
        let mut inputs = BTreeMap::new();
        for (name, path) in [("A", &cfg.a), ("K", &cfg.k), ("config", &cfg.config)] {
            if let Some(p) = path {
                inputs.insert(name.to_string(), p.display().to_string());
            }
        }
        Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: cfg.hash(command),
            seeds,
            inputs,
        }
    }

    /// Lines for a `# `-commented CSV header.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!("config_hash: {}", self.config_hash),
            format!("seeds: {:?}", self.seeds),
        ];
        lines.extend(self.inputs.iter().map(|(k, v)| format!("input {k}: {v}")));
        lines
    }

    /// `value` as a JSON object with a `provenance` key added.
    pub fn attach(&self, value: Value) -> Value {
        let mut object = match value {
            Value::Object(map) => map,
            other => {
                let mut map = Map::new();
                map.insert("data".into(), other);
                map
            }
        };
        object.insert(
            "provenance".into(),
            serde_json::to_value(self).expect("provenance serializes"),
        );
        Value::Object(object)
    }
}

/// Writes into the output directory, creating it on first use.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn new(root: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&root).map_err(|source| CliError::Io {
            path: root.clone(),
            source,
        })?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn text(&mut self, name: &str, content: &str) -> CliResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, content).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json(&mut self, name: &str, value: &Value) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("json serializes");
        text.push('\n');
        self.text(name, &text)
    }

    pub fn csv(
        &mut self,
        name: &str,
        prov: &Provenance,
        extra: &[String],
        columns: &str,
        rows: &[Vec<f64>],
    ) -> CliResult<PathBuf> {
        let mut out = String::new();
        for line in prov.header_lines().iter().chain(extra) {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(columns);
        out.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.text(name, &out)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Label made safe for file names.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
