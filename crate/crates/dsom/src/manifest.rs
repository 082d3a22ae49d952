//! JSON sidecar describing a run: configuration, inputs, timings, outputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dsom_core::rng::Stream;
use dsom_core::trainer::TrainConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl InputFile {
    pub fn hash(path: &Path) -> Result<Self> {
        let mut file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let mut hasher = Sha256::new();
        let mut buf = vec![0u8; 1 << 16];
        let mut bytes = 0u64;
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            bytes += n as u64;
        }
        Ok(InputFile { path: path.display().to_string(), sha256: hex(&hasher.finalize()), bytes })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub grid_side: usize,
    pub diff_coeff: f32,
    pub epsilon: f64,
    pub max_inner_iters: usize,
    pub seed: u64,
    pub init: String,
    pub schedule: Vec<usize>,
}

impl From<&TrainConfig> for ConfigEcho {
    fn from(c: &TrainConfig) -> Self {
        ConfigEcho {
            grid_side: c.grid_side,
            diff_coeff: c.diff_coeff,
            epsilon: c.epsilon,
            max_inner_iters: c.max_inner_iters,
            seed: c.seed,
            init: crate::cli::init_name(c.init).into(),
            schedule: c.schedule.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhaseRecord {
    pub steps: usize,
    pub epochs: usize,
    pub seconds: f64,
    pub final_delta: f32,
    pub stop: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RngDiscipline {
    pub generator: String,
    pub seed: u64,
    /// Stream id per named consumer; every consumer reseeds from `seed`.
    pub streams: BTreeMap<String, u64>,
}

impl RngDiscipline {
    pub fn new(seed: u64) -> Self {
        RngDiscipline {
            generator: "ChaCha8 (rand_chacha), one stream per consumer".into(),
            seed,
            streams: Stream::ALL.iter().map(|&s| (s.name().to_string(), s as u64)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DataSummary {
    pub source: String,
    pub samples: usize,
    pub dim: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(rename = "L")]
    pub side: usize,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSummary>,
    pub inputs: Vec<InputFile>,
    pub phases: Vec<PhaseRecord>,
    pub total_seconds: f64,
    pub outputs: Vec<String>,
    pub rng: RngDiscipline,
    /// Free-form extra values reported by the command.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            side: 0,
            d: 0,
            config: None,
            data: None,
            inputs: Vec::new(),
            phases: Vec::new(),
            total_seconds: 0.0,
            outputs: Vec::new(),
            rng: RngDiscipline::new(seed),
            extra: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        fs::write(&p, b"abc").unwrap();
        let f = InputFile::hash(&p).unwrap();
        assert_eq!(f.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(f.bytes, 3);
    }

    #[test]
    fn json_roundtrip() {
        let mut m = RunManifest::new("train", 7);
        m.side = 4;
        m.d = 16;
        m.config = Some(ConfigEcho::from(&TrainConfig::new(4)));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.write(&p).unwrap();
        assert_eq!(RunManifest::read(&p).unwrap(), m);
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["L"], 4);
        assert_eq!(v["rng"]["streams"]["codebook-init"], 1);
    }
}
