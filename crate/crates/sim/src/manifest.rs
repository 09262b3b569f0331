//! Run manifest written next to the CSV output.
//!
//! Format: UTF-8 text, one `key = value` pair per line, keys in fixed
//! order. Repeated keys (`seed`, `output`) list one value per line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub config_name: String,
    pub config_digest: String,
    pub code_version: String,
    pub seeds: Vec<u64>,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub finished: u64,
    pub outputs: Vec<PathBuf>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(command: &str, config_name: &str, config_digest: &str, seeds: &[u64]) -> Self {
        Self {
            command: command.into(),
            config_name: config_name.into(),
            config_digest: config_digest.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seeds: seeds.to_vec(),
            started: unix_now(),
            finished: 0,
            outputs: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| writeln!(out, "{k} = {v}").expect("writing to a String");
        kv("command", &self.command);
        kv("config_name", &self.config_name);
        kv("config_digest", &self.config_digest);
        kv("code_version", &self.code_version);
        kv("started_unix", &self.started);
        kv("finished_unix", &self.finished);
        for s in &self.seeds {
            kv("seed", s);
        }
        for o in &self.outputs {
            kv("output", &o.display());
        }
        out
    }

    /// Parses the output of [`RunManifest::render`].
    pub fn parse(text: &str) -> Option<Self> {
        let mut m = RunManifest {
            command: String::new(),
            config_name: String::new(),
            config_digest: String::new(),
            code_version: String::new(),
            seeds: Vec::new(),
            started: 0,
            finished: 0,
            outputs: Vec::new(),
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ")?;
            match k {
                "command" => m.command = v.into(),
                "config_name" => m.config_name = v.into(),
                "config_digest" => m.config_digest = v.into(),
                "code_version" => m.code_version = v.into(),
                "started_unix" => m.started = v.parse().ok()?,
                "finished_unix" => m.finished = v.parse().ok()?,
                "seed" => m.seeds.push(v.parse().ok()?),
                "output" => m.outputs.push(PathBuf::from(v)),
                _ => return None,
            }
        }
        Some(m)
    }

    pub fn write(&mut self, path: &Path) -> std::io::Result<()> {
        self.finished = unix_now();
        std::fs::write(path, self.render())
    }
}
