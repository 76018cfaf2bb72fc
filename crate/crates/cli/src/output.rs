//! Run metadata, input hashing and output sinks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Git-style object hash: SHA-256 of `"blob <len>\0"` followed by the content.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

/// An input file read once, with its content hash.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub hash: String,
}

impl Input {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let hash = blob_hash(text.as_bytes());
        Ok(Input { path: path.to_path_buf(), text, hash })
    }

    pub fn describe(&self) -> Value {
        json!({ "path": self.path.display().to_string(), "sha256": self.hash })
    }
}

/// The configuration block embedded in every randomized output, with its hash.
pub struct Meta {
    pub seed: u64,
    pub config: Value,
    pub config_hash: String,
}

impl Meta {
    /// `config` is hashed in its canonical (sorted-key, compact) form.
    pub fn new(seed: u64, config: Value) -> Self {
        let config_hash = blob_hash(config.to_string().as_bytes());
        Meta { seed, config, config_hash }
    }

    /// Comment line that heads CSV output.
    pub fn csv_preamble(&self) -> String {
        format!("# rrates {VERSION} seed={} config_hash={}\n", self.seed, self.config_hash)
    }

    /// `body` with `seed`, `config`, `config_hash` and `version` added.
    pub fn wrap(&self, body: impl Serialize) -> Result<Value> {
        let mut v = serde_json::to_value(body)?;
        let obj = v.as_object_mut().context("report must serialise to an object")?;
        obj.insert("seed".into(), json!(self.seed));
        obj.insert("config".into(), self.config.clone());
        obj.insert("config_hash".into(), json!(self.config_hash));
        obj.insert("version".into(), json!(VERSION));
        Ok(v)
    }
}

/// Writes `text` to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn compact(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

pub fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes CSV rows with a header; fields are written as given.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}
