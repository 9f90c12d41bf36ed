use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{GenerationMode, KernelConfig};
use super::select::union_masks;
use crate::blur::{blur_pair, BlurConfig, BlurredPair, Boundary, Illumination};
use crate::error::{Error, Result};
use crate::io::{encode_png, raster_to_bytes, read_binary_mask, read_png, BitDepth};
use crate::kernel::BlurKernel;
use crate::photometric::{IllumDraw, SaturationMask};

pub const RECORD_VERSION: u32 = 1;
pub const RECORD_FILE: &str = "record.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordObject {
    /// Position in the manifest entry's object list.
    pub index: usize,
    pub class: String,
    pub mask: PathBuf,
}

/// Artifact paths relative to the dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutputs {
    pub sharp: PathBuf,
    pub blurred: PathBuf,
    /// Region kernels, background first.
    pub kernels: Vec<PathBuf>,
    /// Soft region masks parallel to `kernels`.
    pub masks: Vec<PathBuf>,
}

/// Everything needed to regenerate one pair bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub version: u32,
    pub entry_id: String,
    pub pair_index: usize,
    /// Root of every random draw of the pair (kernels, illumination, noise).
    pub pair_seed: u64,
    pub source_image: PathBuf,
    /// Objects blurred with their own kernel, in region order.
    pub objects: Vec<RecordObject>,
    /// Masks whose union marks light sources (light-source mode only).
    pub saturation_sources: Vec<PathBuf>,
    pub mode: GenerationMode,
    pub gamma: f64,
    pub noise_std: f64,
    pub boundary: Boundary,
    pub kernel: KernelConfig,
    pub kernel_size: usize,
    /// Short content hashes of the region kernels, background first.
    pub kernel_ids: Vec<String>,
    pub illumination: IllumDraw,
    pub bit_depth: BitDepth,
    pub outputs: PairOutputs,
}

/// Deterministic 64-bit seed for `(run_seed, id, index)`.
pub fn derive_seed(run_seed: u64, id: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    h.update((id.len() as u64).to_le_bytes());
    h.update(id.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Uniform value in `[0, 1)` derived from `(run_seed, id)`.
pub fn entry_offset(run_seed: u64, id: &str) -> f64 {
    (derive_seed(run_seed, id, u64::MAX) >> 11) as f64 / (1u64 << 53) as f64
}

pub fn kernel_id(k: &BlurKernel) -> String {
    hex::encode(&Sha256::digest(k.to_bytes())[..8])
}

pub fn pair_dir_name(id: &str, index: usize) -> String {
    format!("{id}_{index:02}")
}

impl PairRecord {
    pub fn blur_config(&self) -> BlurConfig {
        BlurConfig {
            gamma: self.gamma,
            noise_std: self.noise_std,
            boundary: self.boundary,
            saturate: true,
        }
    }

    /// Runs the synthesis described by the record.
    pub fn synthesize(&self) -> Result<BlurredPair> {
        let sharp = read_png(&self.source_image)?;
        let masks = self
            .objects
            .iter()
            .map(|o| read_binary_mask(&o.mask))
            .collect::<Result<Vec<_>>>()?;
        let spec = self.kernel.spec(self.kernel_size);
        let cfg = self.blur_config();
        match self.mode {
            GenerationMode::DynamicScenes => blur_pair(
                &sharp,
                &masks,
                &spec,
                &cfg,
                Illumination::DynamicScenes,
                self.pair_seed,
            ),
            GenerationMode::VaryingIllum => {
                let sat = union_masks(&self.saturation_sources, sharp.height(), sharp.width())?;
                let sat = SaturationMask::new(sat)?;
                blur_pair(
                    &sharp,
                    &masks,
                    &spec,
                    &cfg,
                    Illumination::VaryingIllum(&sat),
                    self.pair_seed,
                )
            }
        }
    }

    /// Fills in the fields that depend on the synthesis result.
    pub fn complete(&mut self, pair: &BlurredPair) {
        let dir = PathBuf::from("pairs").join(pair_dir_name(&self.entry_id, self.pair_index));
        let n = pair.regions.len();
        self.kernel_ids = pair.regions.kernels().iter().map(kernel_id).collect();
        self.illumination = pair.draw;
        self.outputs = PairOutputs {
            sharp: dir.join("sharp.png"),
            blurred: dir.join("blurred.png"),
            kernels: (0..n)
                .map(|r| dir.join(format!("kernel_{r}.bin")))
                .collect(),
            masks: (0..n).map(|r| dir.join(format!("mask_{r}.f32"))).collect(),
        };
    }

    /// Encoded artifacts as `(relative path, bytes)`, record excluded.
    pub fn artifacts(&self, pair: &BlurredPair) -> Result<Vec<(PathBuf, Vec<u8>)>> {
        let o = &self.outputs;
        if o.kernels.len() != pair.regions.len() || o.masks.len() != pair.regions.len() {
            return Err(Error::InvalidInput(format!(
                "record lists {} kernels for {} regions",
                o.kernels.len(),
                pair.regions.len()
            )));
        }
        let mut out = vec![
            (o.sharp.clone(), encode_png(&pair.sharp, self.bit_depth)?),
            (
                o.blurred.clone(),
                encode_png(&pair.blurred, self.bit_depth)?,
            ),
        ];
        for (path, k) in o.kernels.iter().zip(pair.regions.kernels()) {
            out.push((path.clone(), k.to_bytes()));
        }
        for (path, m) in o.masks.iter().zip(pair.regions.masks()) {
            out.push((path.clone(), raster_to_bytes(m)?));
        }
        Ok(out)
    }

    pub fn record_path(&self) -> PathBuf {
        PathBuf::from("pairs")
            .join(pair_dir_name(&self.entry_id, self.pair_index))
            .join(RECORD_FILE)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
