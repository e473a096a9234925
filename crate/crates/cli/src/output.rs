//! Artifacts, claims and run manifests.
//!
//! Artifacts are deterministic for fixed inputs, flags and seed; timing and
//! thread counts only appear in the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use repute::game::ReputationScenario;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn scenario_hash(s: &ReputationScenario) -> String {
    format!("{:x}", Sha256::digest(repute::io::canonical_json(s).as_bytes()))
}

/// JSON number, or `"inf"`, `"-inf"`, `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// A checked quantity with its allowance.
#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub name: String,
    pub value: Value,
    /// What the value is compared against.
    pub target: Value,
    /// Absolute tolerance or statistical slack granted.
    pub tolerance: Value,
    pub passed: bool,
}

impl Claim {
    /// `|value − target| ≤ tol`.
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value: num(value),
            target: num(target),
            tolerance: num(tol),
            passed: (value - target).abs() <= tol,
        }
    }

    /// `value ≤ bound + tol`.
    pub fn at_most(name: &str, value: f64, bound: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value: num(value),
            target: json!({ "at_most": num(bound) }),
            tolerance: num(tol),
            passed: value <= bound + tol,
        }
    }
}

/// Mean with its standard error.
pub fn estimate(xs: impl Iterator<Item = f64>) -> Value {
    let v: Vec<f64> = xs.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    json!({ "value": num(mean), "stderr": num((var / n).sqrt()) })
}

pub struct Run {
    pub command: String,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub scenario_path: Option<String>,
    pub params: Value,
    started: Instant,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &str, out_dir: &Path, seed: u64, threads: Option<usize>, params: Value) -> Self {
        Self {
            command: command.into(),
            out_dir: out_dir.to_path_buf(),
            seed,
            threads,
            scenario_path: None,
            params,
            started: Instant::now(),
            outputs: Vec::new(),
        }
    }

    /// `<stem>.manifest.json` next to the primary output.
    pub fn manifest_name(primary: &str) -> String {
        let stem = Path::new(primary).file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
        let dir = Path::new(primary).parent().filter(|p| !p.as_os_str().is_empty());
        let name = format!("{stem}.manifest.json");
        dir.map_or(name.clone(), |d| d.join(&name).display().to_string())
    }

    pub fn write(&mut self, name: &str, content: &str) -> anyhow::Result<()> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Standard artifact: claims plus a command-specific result.
    pub fn artifact(&mut self, name: &str, hash: &str, claims: &[Claim], result: Value) -> anyhow::Result<()> {
        let body = json!({
            "command": self.command,
            "manifest": Self::manifest_name(name),
            "scenario_hash": hash,
            "claims": claims,
            "passed": claims.iter().all(|c| c.passed),
            "result": result,
        });
        self.write_json(name, &body)
    }

    pub fn finish(self, primary: &str) -> anyhow::Result<()> {
        let name = Self::manifest_name(primary);
        let manifest = json!({
            "command": self.command,
            "scenario": self.scenario_path,
            "parameters": self.params,
            "seed": self.seed,
            "threads": self.threads,
            "version": env!("CARGO_PKG_VERSION"),
            "outputs": self.outputs,
            "wall_clock_ms": self.started.elapsed().as_secs_f64() * 1e3,
        });
        let path = self.out_dir.join(&name);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
