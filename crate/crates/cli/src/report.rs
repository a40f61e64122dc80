//! Deterministic run reports. The body is byte-identical across reruns of
//! the same config; volatile data (timestamps, cache statistics) lives in
//! the segregated meta block.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Verdict {
    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.into(),
            outcome: Outcome::Pass,
            detail: detail.into(),
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.into(),
            outcome: Outcome::Fail,
            detail: detail.into(),
        }
    }

    pub fn inconclusive(name: impl Into<String>, detail: impl Into<String>) -> Verdict {
        Verdict {
            name: name.into(),
            outcome: Outcome::Inconclusive,
            detail: detail.into(),
        }
    }
}

/// Deterministic report content: everything needed to audit the run.
#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub command: String,
    pub module_version: String,
    pub config_sha256: String,
    /// Every parameter the run used, defaults included.
    pub params: BTreeMap<String, String>,
    pub steps: Vec<serde_json::Value>,
    pub verdicts: Vec<Verdict>,
    /// Emitted segment files: relative path → sha256 of canonical bytes.
    pub segment_files: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMeta {
    pub timestamp_unix: u64,
    pub body_sha256: String,
    pub cache_hits: usize,
    pub cache_misses: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub body: ReportBody,
    pub meta: ReportMeta,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for v in &self.body.verdicts {
            match v.outcome {
                Outcome::Fail => return 1,
                Outcome::Inconclusive => code = 2,
                Outcome::Pass => {}
            }
        }
        code
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.body.command));
        for v in &self.body.verdicts {
            let tag = match v.outcome {
                Outcome::Pass => "PASS",
                Outcome::Fail => "FAIL",
                Outcome::Inconclusive => "INCONCLUSIVE",
            };
            out.push_str(&format!("{tag:12} {}: {}\n", v.name, v.detail));
        }
        out
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let path = out_dir.join(format!("{}.report.json", self.body.command));
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub struct ReportBuilder {
    body: ReportBody,
}

impl ReportBuilder {
    pub fn new(command: &str, config_text: &str) -> ReportBuilder {
        ReportBuilder {
            body: ReportBody {
                command: command.to_string(),
                module_version: lamlab_core::MODULE_VERSION.to_string(),
                config_sha256: sha256_hex(config_text.as_bytes()),
                params: BTreeMap::new(),
                steps: Vec::new(),
                verdicts: Vec::new(),
                segment_files: BTreeMap::new(),
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.body.params.insert(key.to_string(), value.to_string());
    }

    pub fn step(&mut self, value: serde_json::Value) {
        self.body.steps.push(value);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.body.verdicts.push(v);
    }

    pub fn segment_file(&mut self, name: &str, sha: &str) {
        self.body.segment_files.insert(name.to_string(), sha.to_string());
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.body.verdicts
    }

    pub fn finish(self, cache_hits: usize, cache_misses: usize) -> RunReport {
        let body_json = serde_json::to_string(&self.body).expect("report body serializes");
        let body_sha256 = sha256_hex(body_json.as_bytes());
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunReport {
            body: self.body,
            meta: ReportMeta {
                timestamp_unix,
                body_sha256,
                cache_hits,
                cache_misses,
            },
        }
    }
}
