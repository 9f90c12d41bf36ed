use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blur::{BlurConfig, Boundary};
use crate::error::{Error, Result};
use crate::io::BitDepth;
use crate::kernel::{
    ExposureRange, KernelGeneratorSpec, KernelModel, Linear3dParams, TremorParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Moving objects with their own kernels, whole-image exposure jitter.
    #[default]
    DynamicScenes,
    /// Light sources pushed into saturation before blurring.
    VaryingIllum,
}

/// Kernel model settings shared by every pair; the size is chosen per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub model: KernelModel,
    pub exposure: ExposureRange,
    pub tremor: TremorParams,
    pub spline_grid: Option<usize>,
    pub spline_jitter: f64,
    pub linear3d: Option<Linear3dParams>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let spec = KernelGeneratorSpec::default();
        Self {
            model: spec.model,
            exposure: spec.exposure,
            tremor: spec.tremor,
            spline_grid: spec.spline_grid,
            spline_jitter: spec.spline_jitter,
            linear3d: spec.linear3d,
        }
    }
}

impl KernelConfig {
    pub fn spec(&self, size: usize) -> KernelGeneratorSpec {
        KernelGeneratorSpec {
            model: self.model,
            size,
            exposure: self.exposure,
            seed: 0,
            tremor: self.tremor,
            spline_grid: self.spline_grid,
            spline_jitter: self.spline_jitter,
            linear3d: self.linear3d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeShare {
    pub size: usize,
    pub weight: f64,
}

/// Everything that defines a dataset run besides the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub mode: GenerationMode,
    pub gamma: f64,
    pub kernel: KernelConfig,
    /// Kernel sizes and their shares; mode default when unset.
    pub kernel_sizes: Option<Vec<SizeShare>>,
    pub noise_std: f64,
    /// Pairs per accepted image; mode default when unset.
    pub pairs_per_image: Option<usize>,
    pub max_objects: usize,
    pub min_object_area: usize,
    pub moving_supercategories: Vec<String>,
    /// Supercategories that mark light sources.
    pub light_supercategories: Vec<String>,
    /// Supercategories that disqualify an image from the light-source mode.
    pub excluded_supercategories: Vec<String>,
    /// 8-bit level above which a pixel counts as bright.
    pub bright_level: u8,
    pub max_bright_fraction: f64,
    pub boundary: Boundary,
    pub output_bit_depth: BitDepth,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Self {
            mode: GenerationMode::DynamicScenes,
            gamma: 2.2,
            kernel: KernelConfig::default(),
            kernel_sizes: None,
            noise_std: 0.0,
            pairs_per_image: None,
            max_objects: 2,
            min_object_area: 400,
            moving_supercategories: strings(&["person", "vehicle", "animal"]),
            light_supercategories: strings(&["light"]),
            excluded_supercategories: strings(&["person"]),
            bright_level: 250,
            max_bright_fraction: 0.001,
            boundary: Boundary::Replicate,
            output_bit_depth: BitDepth::Eight,
            seed: 0,
            output_dir: None,
        }
    }
}

impl GenerationConfig {
    pub fn pairs_per_image(&self) -> usize {
        self.pairs_per_image.unwrap_or(match self.mode {
            GenerationMode::DynamicScenes => 1,
            GenerationMode::VaryingIllum => 8,
        })
    }

    pub fn kernel_sizes(&self) -> Vec<SizeShare> {
        self.kernel_sizes
            .clone()
            .unwrap_or_else(|| match self.mode {
                GenerationMode::DynamicScenes => vec![SizeShare {
                    size: 65,
                    weight: 1.0,
                }],
                GenerationMode::VaryingIllum => vec![
                    SizeShare {
                        size: 33,
                        weight: 0.5,
                    },
                    SizeShare {
                        size: 65,
                        weight: 0.5,
                    },
                ],
            })
    }

    /// Kernel size for a position `u` in `[0, 1)` of the cumulative shares.
    pub fn kernel_size_at(&self, u: f64) -> usize {
        let sizes = self.kernel_sizes();
        let total: f64 = sizes.iter().map(|s| s.weight).sum();
        let mut acc = 0.0;
        for s in &sizes {
            acc += s.weight / total;
            if u < acc {
                return s.size;
            }
        }
        sizes.last().expect("validated non-empty").size
    }

    pub fn blur_config(&self) -> BlurConfig {
        BlurConfig {
            gamma: self.gamma,
            noise_std: self.noise_std,
            boundary: self.boundary,
            saturate: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.blur_config().validate()?;
        if self.pairs_per_image() < 1 {
            return bad("pairs_per_image must be >= 1".into());
        }
        let sizes = self.kernel_sizes();
        if sizes.is_empty() {
            return bad("kernel_sizes must not be empty".into());
        }
        for s in &sizes {
            if !(s.weight > 0.0) || !s.weight.is_finite() {
                return bad(format!("kernel size {} has non-positive weight", s.size));
            }
            self.kernel.spec(s.size).validate()?;
        }
        if !(0.0..=1.0).contains(&self.max_bright_fraction) {
            return bad("max_bright_fraction must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}
