use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a run: the effective configuration with all
/// defaults filled in, its digest, the seed and the component versions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub versions: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
}

impl Provenance {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: Option<u64>, inputs: &[&Path]) -> Result<Self> {
        let value = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
        let bytes = serde_json::to_vec(&value).expect("JSON value serializes");
        let versions = [
            ("hhgq-cli", crate::VERSION),
            ("hhgq-core", hhgq_core::VERSION),
            ("hhgq-sim", hhgq_sim::VERSION),
            ("hhgq-timetag", hhgq_timetag::VERSION),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: file_sha256(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tool: "hhgq".into(),
            command: command.into(),
            config_sha256: hex::encode(Sha256::digest(&bytes)),
            config: value,
            seed,
            threads: rayon::current_num_threads(),
            versions,
            inputs,
        })
    }
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}
