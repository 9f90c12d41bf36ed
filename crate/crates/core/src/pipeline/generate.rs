use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{GenerationConfig, GenerationMode};
use super::manifest::{ManifestEntry, SourceManifest};
use super::record::{
    derive_seed, entry_offset, PairOutputs, PairRecord, RecordObject, RECORD_VERSION,
};
use super::select::{check_illum_entry, load_objects, saturation_sources, select_objects};
use crate::error::{Error, Result};
use crate::io::{read_png, write_bytes};
use crate::photometric::IllumDraw;

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    /// `None` when the entry failed before any pair was attempted.
    pub pair_index: Option<usize>,
    pub error: String,
}

/// Machine-readable outcome of a dataset run. Contains no timings so that
/// identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: u32,
    pub mode: GenerationMode,
    pub seed: u64,
    pub pairs_per_image: usize,
    pub entries: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub failures: Vec<Failure>,
    /// Record paths relative to the dataset directory.
    pub pairs: Vec<PathBuf>,
    pub success: bool,
}

enum Prepared {
    Accepted(Vec<PairRecord>),
    Rejected(String),
}

/// Pair records of one entry, before synthesis.
fn prepare_entry(
    entry: &ManifestEntry,
    manifest: &SourceManifest,
    cfg: &GenerationConfig,
) -> Result<Prepared> {
    if cfg.mode == GenerationMode::VaryingIllum {
        if let Err(r) = check_illum_entry(entry, manifest, cfg)? {
            return Ok(Prepared::Rejected(r.to_string()));
        }
    }
    let image = read_png(&entry.image)?;
    let objects = load_objects(entry, manifest)?;
    for o in &objects {
        if o.mask.height() != image.height() || o.mask.width() != image.width() {
            return Err(Error::shape(
                format!("{}x{} mask", image.height(), image.width()),
                format!(
                    "{}x{} for object {}",
                    o.mask.height(),
                    o.mask.width(),
                    o.index
                ),
            ));
        }
    }
    let selected: Vec<RecordObject> = select_objects(&objects, cfg)
        .into_iter()
        .map(|o| RecordObject {
            index: o.index,
            class: o.class.clone(),
            mask: entry.objects[o.index].mask.clone(),
        })
        .collect();
    let saturation = match cfg.mode {
        GenerationMode::VaryingIllum => saturation_sources(entry, manifest, cfg),
        GenerationMode::DynamicScenes => Vec::new(),
    };

    let n = cfg.pairs_per_image();
    let offset = entry_offset(cfg.seed, &entry.id);
    let records = (0..n)
        .map(|p| PairRecord {
            version: RECORD_VERSION,
            entry_id: entry.id.clone(),
            pair_index: p,
            pair_seed: derive_seed(cfg.seed, &entry.id, p as u64),
            source_image: entry.image.clone(),
            objects: selected.clone(),
            saturation_sources: saturation.clone(),
            mode: cfg.mode,
            gamma: cfg.gamma,
            noise_std: cfg.noise_std,
            boundary: cfg.boundary,
            kernel: cfg.kernel.clone(),
            // Stratified over the entry's pairs: exact shares when the pair
            // count allows, a seeded draw otherwise.
            kernel_size: cfg.kernel_size_at((p as f64 + offset) / n as f64),
            kernel_ids: Vec::new(),
            illumination: IllumDraw::Identity,
            bit_depth: cfg.output_bit_depth,
            outputs: PairOutputs {
                sharp: PathBuf::new(),
                blurred: PathBuf::new(),
                kernels: Vec::new(),
                masks: Vec::new(),
            },
        })
        .collect();
    Ok(Prepared::Accepted(records))
}

/// Synthesizes one pair and writes its artifacts and record under `out`.
pub fn write_pair(mut record: PairRecord, out: &Path) -> Result<PathBuf> {
    let pair = record.synthesize()?;
    record.complete(&pair);
    let artifacts = record.artifacts(&pair)?;
    let dir = out.join(record.record_path().parent().expect("pair directory"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (rel, bytes) in &artifacts {
        write_bytes(&out.join(rel), bytes)?;
    }
    let rel = record.record_path();
    write_bytes(&out.join(&rel), record.to_json()?.as_bytes())?;
    Ok(rel)
}

fn prepare_output_dir(out: &Path) -> Result<()> {
    if out.exists() {
        let mut it = std::fs::read_dir(out).map_err(|e| Error::io(out, e))?;
        if it.next().is_some() {
            return Err(Error::Config(format!(
                "output directory {} is not empty",
                out.display()
            )));
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Generates a dataset under `out` with `jobs` worker threads.
///
/// Configuration and output-directory problems abort the run. Failures of
/// single entries or pairs are logged, listed in the summary, and skipped.
pub fn generate_dataset(
    manifest: &SourceManifest,
    cfg: &GenerationConfig,
    out: &Path,
    jobs: usize,
) -> Result<RunSummary> {
    cfg.validate()?;
    prepare_output_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;

    let (prepared, written) = pool.install(|| {
        let prepared: Vec<(String, Result<Prepared>)> = manifest
            .entries
            .par_iter()
            .map(|e| (e.id.clone(), prepare_entry(e, manifest, cfg)))
            .collect();
        let records: Vec<PairRecord> = prepared
            .iter()
            .filter_map(|(_, p)| match p {
                Ok(Prepared::Accepted(r)) => Some(r.iter().cloned()),
                _ => None,
            })
            .flatten()
            .collect();
        let written: Vec<(String, usize, Result<PathBuf>)> = records
            .into_par_iter()
            .map(|r| (r.entry_id.clone(), r.pair_index, write_pair(r, out)))
            .collect();
        (prepared, written)
    });

    let mut rejected = Vec::new();
    let mut failures = Vec::new();
    let mut accepted = 0;
    for (id, p) in prepared {
        match p {
            Ok(Prepared::Accepted(_)) => accepted += 1,
            Ok(Prepared::Rejected(reason)) => {
                log::info!("entry {id} rejected: {reason}");
                rejected.push(Rejection { id, reason });
            }
            Err(e) => {
                log::error!("entry {id} failed: {e}");
                failures.push(Failure {
                    id,
                    pair_index: None,
                    error: e.to_string(),
                });
            }
        }
    }
    let mut pairs = Vec::new();
    for (id, index, result) in written {
        match result {
            Ok(path) => pairs.push(path),
            Err(e) => {
                log::error!("pair {index} of {id} failed: {e}");
                failures.push(Failure {
                    id,
                    pair_index: Some(index),
                    error: e.to_string(),
                });
            }
        }
    }

    let summary = RunSummary {
        version: RECORD_VERSION,
        mode: cfg.mode,
        seed: cfg.seed,
        pairs_per_image: cfg.pairs_per_image(),
        entries: manifest.entries.len(),
        accepted,
        rejected,
        success: failures.is_empty(),
        failures,
        pairs,
    };
    let stored = GenerationConfig {
        output_dir: None,
        ..cfg.clone()
    };
    write_bytes(
        &out.join(CONFIG_FILE),
        serde_json::to_string_pretty(&stored)?.as_bytes(),
    )?;
    write_bytes(
        &out.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    log::info!(
        "{} pairs from {} of {} entries, {} failures",
        summary.pairs.len(),
        summary.accepted,
        summary.entries,
        summary.failures.len()
    );
    Ok(summary)
}
