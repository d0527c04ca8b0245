//! Output bookkeeping: staged writes, the run manifest, and failure markers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sidecar_path(out, ".manifest.json")
}

pub fn failure_marker(out: &Path) -> PathBuf {
    sidecar_path(out, ".FAILED")
}

/// One subcommand invocation. Outputs are held in memory and only written,
/// together with the manifest, once the command has succeeded.
pub struct Run {
    command: String,
    primary: Option<PathBuf>,
    options: Map<String, Value>,
    inputs: Vec<PathBuf>,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Run {
    pub fn new(command: &str, primary: Option<PathBuf>) -> Self {
        Run {
            command: command.to_string(),
            primary,
            options: Map::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Records an effective option; all options together form the config hash.
    pub fn option(&mut self, key: &str, value: impl Serialize) {
        self.options
            .insert(key.to_string(), serde_json::to_value(value).expect("options serialize"));
    }

    pub fn input(&mut self, path: &Path) -> PathBuf {
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
        path.to_path_buf()
    }

    pub fn output(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.outputs.push((path, bytes));
    }

    /// Writes a JSON document to `path` or, without one, to stdout.
    pub fn json_output(&mut self, path: Option<PathBuf>, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        match path {
            Some(p) => self.output(p, bytes),
            None => print!("{}", String::from_utf8_lossy(&bytes)),
        }
        Ok(())
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn config_hash(&self) -> String {
        let v = json!({ "command": self.command, "options": self.options });
        sha256_hex(&serde_json::to_vec(&v).expect("json"))
    }

    /// Writes staged outputs atomically, then the manifest beside the primary
    /// output, and clears any failure marker left by an earlier run.
    pub fn commit(self) -> Result<Vec<String>> {
        let mut inputs = Vec::new();
        for p in &self.inputs {
            let bytes = fs::read(p).with_context(|| format!("digesting input {}", p.display()))?;
            inputs.push(json!({ "path": p, "sha256": sha256_hex(&bytes) }));
        }
        let mut outputs = Vec::new();
        for (path, bytes) in &self.outputs {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let tmp = sidecar_path(path, ".partial");
            fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(json!({ "path": path, "sha256": sha256_hex(bytes) }));
        }
        if let Some(primary) = &self.primary {
            let manifest = json!({
                "tool": "factkit",
                "version": env!("CARGO_PKG_VERSION"),
                "command": self.command,
                "config_hash": self.config_hash(),
                "options": self.options,
                "inputs": inputs,
                "outputs": outputs,
                "warnings": self.warnings,
                "status": "ok",
            });
            let mut bytes = serde_json::to_vec_pretty(&manifest)?;
            bytes.push(b'\n');
            let mp = manifest_path(primary);
            fs::write(&mp, bytes).with_context(|| format!("writing {}", mp.display()))?;
            let marker = failure_marker(primary);
            if marker.exists() {
                fs::remove_file(&marker).with_context(|| format!("removing {}", marker.display()))?;
            }
        }
        Ok(self.warnings)
    }
}

/// The error chain on one line, skipping causes already quoted by the
/// message above them.
pub fn render_error(error: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in error.chain() {
        let msg = cause.to_string();
        if out.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
    }
    out
}

/// Marks `out` as failed and removes its manifest so stale results are not
/// mistaken for a successful run.
pub fn mark_failed(out: &Path, command: &str, error: &anyhow::Error) {
    let _ = fs::remove_file(manifest_path(out));
    let body = json!({
        "command": command,
        "status": "failed",
        "error": render_error(error),
    });
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        let _ = fs::create_dir_all(dir);
    }
    let _ = fs::write(failure_marker(out), format!("{body:#}\n"));
}
