use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::compose::{compose_nonuniform, smooth_region_masks, RegionSet};
use super::convolve::Boundary;
use super::gamma::{gamma_decode, gamma_encode};
use super::noise::{add_noise, saturate};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::{BlurKernel, KernelSource};
use crate::photometric::{dynamic_scene_illum, varying_illum, IllumDraw, SaturationMask};

/// ChaCha stream used for kernel draws.
pub const KERNEL_STREAM: u64 = 0;
/// ChaCha stream used for the illumination draw.
pub const ILLUM_STREAM: u64 = 1;
/// ChaCha stream used for sensor noise.
pub const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlurConfig {
    pub gamma: f64,
    pub noise_std: f64,
    pub boundary: Boundary,
    /// Clip the blurred image to `[0, 1]` after encoding.
    pub saturate: bool,
}

impl Default for BlurConfig {
    fn default() -> Self {
        Self {
            gamma: 2.2,
            noise_std: 0.0,
            boundary: Boundary::Replicate,
            saturate: true,
        }
    }
}

impl BlurConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        Ok(())
    }
}

/// Photometric augmentation applied to the photon-space sharp image.
#[derive(Debug, Clone, Copy)]
pub enum Illumination<'a> {
    Identity,
    DynamicScenes,
    VaryingIllum(&'a SaturationMask),
}

#[derive(Debug, Clone)]
pub struct BlurredPair {
    /// Augmented sharp image, encoded and clipped to `[0, 1]`.
    pub sharp: Image,
    pub blurred: Image,
    /// Regions actually used (empty object masks removed).
    pub regions: RegionSet,
    /// Every kernel drawn, background first, including those of dropped masks.
    pub kernels: Vec<BlurKernel>,
    pub draw: IllumDraw,
    pub seed: u64,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Synthesizes one sharp/blurred pair.
///
/// Kernels are drawn for the background and every object, masks are softened
/// with their kernels, the sharp image is moved to photon space and
/// augmented, every region is blurred and blended, noise is added, and both
/// images are encoded back. The blurred image is clipped last.
///
/// All randomness derives from `seed`, one ChaCha stream per purpose, so the
/// kernels do not depend on the illumination mode and vice versa.
pub fn blur_pair(
    sharp: &Image,
    object_masks: &[Image],
    kernels: &dyn KernelSource,
    cfg: &BlurConfig,
    illum: Illumination<'_>,
    seed: u64,
) -> Result<BlurredPair> {
    cfg.validate()?;
    sharp.check_range(0.0, 1.0)?;
    for m in object_masks {
        if m.height() != sharp.height() || m.width() != sharp.width() {
            return Err(Error::shape(
                format!("{}x{} mask", sharp.height(), sharp.width()),
                format!("{}x{}", m.height(), m.width()),
            ));
        }
    }

    let mut krng = stream(seed, KERNEL_STREAM);
    let drawn = (0..=object_masks.len())
        .map(|region| kernels.draw(region, &mut krng))
        .collect::<Result<Vec<_>>>()?;

    let (h, w) = (sharp.height(), sharp.width());
    let regions = if object_masks
        .iter()
        .any(|m| m.data().iter().any(|&v| v != 0.0))
    {
        smooth_region_masks(object_masks, &drawn, cfg.boundary)?
    } else {
        RegionSet::uniform(h, w, drawn[0].clone())
    };

    let photons = gamma_decode(sharp, cfg.gamma)?;
    let mut irng = stream(seed, ILLUM_STREAM);
    let (photons, draw) = match illum {
        Illumination::Identity => (photons, IllumDraw::Identity),
        Illumination::DynamicScenes => dynamic_scene_illum(&photons, &mut irng)?,
        Illumination::VaryingIllum(mask) => varying_illum(&photons, mask, &mut irng)?,
    };

    let mut blurred = compose_nonuniform(&photons, &regions, cfg.boundary)?;
    if cfg.noise_std > 0.0 {
        blurred = add_noise(&blurred, cfg.noise_std, &mut stream(seed, NOISE_STREAM))?;
    }
    // Noise and FFT round-off can dip below zero; photon counts cannot.
    let blurred = gamma_encode(&blurred.map(|v| v.max(0.0)), cfg.gamma)?;
    let blurred = if cfg.saturate {
        saturate(&blurred)
    } else {
        blurred
    };
    let sharp_out = saturate(&gamma_encode(&photons, cfg.gamma)?);

    Ok(BlurredPair {
        sharp: sharp_out,
        blurred,
        regions,
        kernels: drawn,
        draw,
        seed,
    })
}
