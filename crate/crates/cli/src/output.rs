use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::Cli;

pub enum Body {
    Json(Value),
    Csv(String),
}

pub struct Outcome {
    pub command: &'static str,
    pub body: Body,
    /// False when a verdict failed; maps to exit status 2.
    pub holds: bool,
    pub inputs: Vec<InputHash>,
    pub tolerance: Option<f64>,
    pub depth: Option<u32>,
    pub seed: Option<u64>,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn json(command: &'static str, value: Value) -> Self {
        Outcome { command, body: Body::Json(value), holds: true, inputs: Vec::new(), tolerance: None, depth: None, seed: None, elapsed: Duration::ZERO }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunManifest<'a> {
    command: &'a str,
    inputs: &'a [InputHash],
    engine_version: &'a str,
    tolerance: Option<f64>,
    depth: Option<u32>,
    seed: Option<u64>,
    wall_clock_ms: f64,
    results: Vec<Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a file and records its hash.
pub fn read_input(path: &Path, inputs: &mut Vec<InputHash>) -> anyhow::Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    inputs.push(InputHash { path: path.display().to_string(), sha256: sha256_hex(text.as_bytes()) });
    Ok(text)
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
    f.write_all(contents)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))
}

fn render(body: &Body) -> anyhow::Result<String> {
    Ok(match body {
        Body::Json(v) => serde_json::to_string_pretty(v)? + "\n",
        Body::Csv(s) => s.clone(),
    })
}

pub fn emit(cli: &Cli, o: &Outcome) -> anyhow::Result<()> {
    let text = render(&o.body)?;
    match &cli.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(p) = &cli.manifest {
        let result = match &o.body {
            Body::Json(v) => v.clone(),
            Body::Csv(s) => serde_json::json!({ "csvSha256": sha256_hex(s.as_bytes()) }),
        };
        let m = RunManifest {
            command: o.command,
            inputs: &o.inputs,
            engine_version: rhi_core::VERSION,
            tolerance: o.tolerance,
            depth: o.depth,
            seed: o.seed,
            wall_clock_ms: o.elapsed.as_secs_f64() * 1e3,
            results: vec![result],
        };
        write_atomic(p, (serde_json::to_string_pretty(&m)? + "\n").as_bytes())?;
    }
    Ok(())
}
