use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Files produced by a command, written together once the command is done.
#[derive(Default)]
pub struct Bundle {
    files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Bundle {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.0.clone()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub platform: String,
    pub parallel_feature: bool,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub seed_source: &'static str,
    pub config: Value,
    pub outputs: Vec<String>,
    pub status: &'static str,
    pub exit_code: u8,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(argv: Vec<String>) -> Self {
        Manifest {
            tool: "dtlab",
            version: env!("CARGO_PKG_VERSION"),
            platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
            parallel_feature: dtlab::par::ExecMode::parallel_available(),
            command: String::new(),
            argv,
            seed: dtlab::DEFAULT_SEED,
            seed_source: "default",
            config: Value::Null,
            outputs: Vec::new(),
            status: "error",
            exit_code: 1,
            error: None,
            warnings: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(dir.join("manifest.json"), bytes).context("cannot write manifest.json")
    }
}

/// `--out` as given on the command line, for runs whose arguments did not parse.
pub fn out_dir_from_argv(argv: &[String]) -> String {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            if let Some(v) = it.next() {
                return v.clone();
            }
        } else if let Some(v) = a.strip_prefix("--out=") {
            return v.to_string();
        }
    }
    "dtlab-out".to_string()
}
