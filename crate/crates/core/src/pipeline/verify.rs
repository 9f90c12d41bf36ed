use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generate::{RunSummary, SUMMARY_FILE};
use super::record::{PairRecord, RECORD_FILE};
use crate::blur::partition_error;
use crate::error::{Error, Result};
use crate::io::{raster_from_bytes, read_bytes};
use crate::kernel::BlurKernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    Pass,
    /// Artifacts whose bytes differ from a fresh synthesis.
    Mismatch {
        artifacts: Vec<PathBuf>,
    },
    MissingArtifact {
        artifacts: Vec<PathBuf>,
    },
    /// Stored kernels or masks break their invariants.
    Invalid {
        message: String,
    },
    /// The pair could not be regenerated.
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub record: PathBuf,
    #[serde(flatten)]
    pub status: PairStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pairs: Vec<PairVerdict>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairVerdict> {
        self.pairs.iter().filter(|p| p.status != PairStatus::Pass)
    }
}

/// Record paths listed in the summary, or found under `pairs/` when the
/// summary is missing.
fn record_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = dir.join(SUMMARY_FILE);
    if summary.is_file() {
        let text = std::fs::read_to_string(&summary).map_err(|e| Error::io(&summary, e))?;
        let s: RunSummary = serde_json::from_str(&text)?;
        return Ok(s.pairs);
    }
    log::warn!("{} missing, scanning pair directories", summary.display());
    let pairs = dir.join("pairs");
    let mut out = Vec::new();
    for e in std::fs::read_dir(&pairs).map_err(|e| Error::io(&pairs, e))? {
        let e = e.map_err(|e| Error::io(&pairs, e))?;
        out.push(PathBuf::from("pairs").join(e.file_name()).join(RECORD_FILE));
    }
    out.sort();
    Ok(out)
}

fn check_invariants(dir: &Path, record: &PairRecord) -> Result<Option<String>> {
    for rel in &record.outputs.kernels {
        let k = BlurKernel::from_bytes(&read_bytes(&dir.join(rel))?)?;
        if let Err(e) = k.validate() {
            return Ok(Some(format!("{}: {e}", rel.display())));
        }
    }
    let masks = record
        .outputs
        .masks
        .iter()
        .map(|rel| raster_from_bytes(&read_bytes(&dir.join(rel))?))
        .collect::<Result<Vec<_>>>()?;
    let err = partition_error(&masks);
    if !(err < 1e-6) {
        return Ok(Some(format!(
            "masks deviate from a partition of unity by {err:e}"
        )));
    }
    Ok(None)
}

fn verify_pair(dir: &Path, rel: &Path) -> PairStatus {
    let path = dir.join(rel);
    if !path.is_file() {
        return PairStatus::MissingArtifact {
            artifacts: vec![rel.to_path_buf()],
        };
    }
    let record = match PairRecord::load(&path) {
        Ok(r) => r,
        Err(e) => {
            return PairStatus::Error {
                message: e.to_string(),
            }
        }
    };
    let o = &record.outputs;
    let missing: Vec<PathBuf> = [&o.sharp, &o.blurred]
        .into_iter()
        .chain(&o.kernels)
        .chain(&o.masks)
        .filter(|p| !dir.join(p).is_file())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return PairStatus::MissingArtifact { artifacts: missing };
    }
    match check_invariants(dir, &record) {
        Ok(None) => {}
        Ok(Some(message)) => return PairStatus::Invalid { message },
        Err(e) => {
            return PairStatus::Invalid {
                message: e.to_string(),
            }
        }
    }

    let regenerated = record.synthesize().and_then(|pair| {
        let mut fresh = record.clone();
        fresh.complete(&pair);
        let artifacts = fresh.artifacts(&pair)?;
        Ok((fresh, artifacts))
    });
    let (fresh, artifacts) = match regenerated {
        Ok(x) => x,
        Err(e) => {
            return PairStatus::Error {
                message: e.to_string(),
            }
        }
    };
    let mut differing = Vec::new();
    if fresh != record {
        differing.push(rel.to_path_buf());
    }
    for (p, bytes) in artifacts {
        match read_bytes(&dir.join(&p)) {
            Ok(stored) if stored == bytes => {}
            _ => differing.push(p),
        }
    }
    if differing.is_empty() {
        PairStatus::Pass
    } else {
        PairStatus::Mismatch {
            artifacts: differing,
        }
    }
}

/// Regenerates every pair of a dataset and compares it byte for byte.
/// Problems with single pairs are reported, not raised.
pub fn verify_dataset(dir: &Path) -> Result<VerifyReport> {
    use rayon::prelude::*;
    let records = record_paths(dir)?;
    let pairs: Vec<PairVerdict> = records
        .par_iter()
        .map(|rel| PairVerdict {
            record: rel.clone(),
            status: verify_pair(dir, rel),
        })
        .collect();
    let passed = pairs
        .iter()
        .filter(|p| p.status == PairStatus::Pass)
        .count();
    Ok(VerifyReport {
        failed: pairs.len() - passed,
        passed,
        pairs,
    })
}
