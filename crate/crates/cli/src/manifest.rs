use std::path::{Path, PathBuf};

use anyhow::Context;
use ehh::trainer::CycleRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::report::EvalReport;

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// A file read or written by a run, with its content hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(role: &str, path: &Path) -> anyhow::Result<Self> {
        Ok(Self {
            role: role.to_string(),
            path: std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf()),
            sha256: sha256_file(path)?,
        })
    }
}

/// One trained candidate: a grid point or a restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub stage: String,
    pub q: usize,
    pub neurons: usize,
    pub seed: u64,
    pub cycles: Option<usize>,
    pub active_neurons: Option<usize>,
    pub training_gcv: Option<f64>,
    pub test_vaf: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub per_candidate_ms: Vec<f64>,
}

/// Record of one command invocation, sufficient to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    #[serde(default)]
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
    pub training_fit: Option<EvalReport>,
    pub test_report: Option<EvalReport>,
    #[serde(default)]
    pub cycles: Vec<CycleRecord>,
    pub timings: Timings,
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            version: MANIFEST_VERSION,
            command: command.to_string(),
            seed: config.train.seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            candidates: Vec::new(),
            selected: None,
            training_fit: None,
            test_report: None,
            cycles: Vec::new(),
            timings: Timings::default(),
        }
    }

    pub fn input(&self, role: &str) -> Option<&FileRecord> {
        self.inputs.iter().find(|f| f.role == role)
    }

    pub fn output(&self, role: &str) -> Option<&FileRecord> {
        self.outputs.iter().find(|f| f.role == role)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
