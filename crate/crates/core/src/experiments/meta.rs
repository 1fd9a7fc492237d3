//! Run metadata written next to every result set.

use std::path::Path;
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub version: String,
    pub git_describe: Option<String>,
    pub threads: usize,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub created_unix: u64,
}

impl RunMeta {
    pub fn new(command: &str, config: serde_json::Value, seeds: Vec<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_describe: git_describe(),
            threads: rayon::current_num_threads(),
            seeds,
            config,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    /// Write `meta.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let file = std::fs::File::create(dir.join("meta.json"))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}

/// `git describe --always --dirty` of the working directory, if available.
pub fn git_describe() -> Option<String> {
    let out = Command::new("git").args(["describe", "--always", "--dirty"]).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!s.is_empty()).then_some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_meta_json() {
        let dir = tempfile::tempdir().unwrap();
        let meta = RunMeta::new("simulate", serde_json::json!({"n": 64}), vec![1, 2]);
        meta.write(dir.path()).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
        assert_eq!(v["command"], "simulate");
        assert_eq!(v["seeds"][1], 2);
        assert_eq!(v["config"]["n"], 64);
        assert!(v["threads"].as_u64().unwrap() >= 1);
    }
}
