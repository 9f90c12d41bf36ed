use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::raster::rasterize_kernel;
use super::trajectory::{
    sample_linear3d_trajectory_with, sample_spline_trajectory, sample_tremor_trajectory_with,
    Linear3dParams, Trajectory, TremorParams,
};
use super::{center_kernel, BlurKernel};
use crate::error::{Error, Result};

/// Resamples allowed after the first overflowing trajectory.
pub const MAX_OVERFLOW_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelModel {
    #[default]
    Tremor,
    Spline6,
    Linear3d,
}

impl std::str::FromStr for KernelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tremor" => Ok(KernelModel::Tremor),
            "spline6" => Ok(KernelModel::Spline6),
            "linear3d" => Ok(KernelModel::Linear3d),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel model `{other}`"
            ))),
        }
    }
}

/// Exposure time in seconds, drawn uniformly per kernel. `min == max` fixes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureRange {
    pub min: f64,
    pub max: f64,
}

impl Default for ExposureRange {
    fn default() -> Self {
        Self {
            min: 1.0 / 100.0,
            max: 1.0 / 4.0,
        }
    }
}

impl ExposureRange {
    pub fn fixed(seconds: f64) -> Self {
        Self {
            min: seconds,
            max: seconds,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..self.max)
        } else {
            self.min
        }
    }
}

/// Anything that can hand out blur kernels for a pair. `region` is 0 for the
/// background and `1..` for objects.
pub trait KernelSource: Sync {
    fn draw(&self, region: usize, rng: &mut dyn RngCore) -> Result<BlurKernel>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelGeneratorSpec {
    pub model: KernelModel,
    pub size: usize,
    pub exposure: ExposureRange,
    pub seed: u64,
    pub tremor: TremorParams,
    /// Control-point grid of the spline model; `size / 2` when unset.
    pub spline_grid: Option<usize>,
    /// Relative standard deviation of the per-pixel spline jitter.
    pub spline_jitter: f64,
    /// Linear 3D parameters; scaled to `size` when unset.
    pub linear3d: Option<Linear3dParams>,
}

impl Default for KernelGeneratorSpec {
    fn default() -> Self {
        Self {
            model: KernelModel::Tremor,
            size: 65,
            exposure: ExposureRange::default(),
            seed: 0,
            tremor: TremorParams::default(),
            spline_grid: None,
            spline_jitter: 0.1,
            linear3d: None,
        }
    }
}

impl KernelGeneratorSpec {
    pub fn new(model: KernelModel, size: usize) -> Self {
        Self {
            model,
            size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 3 || self.size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd and >= 3, got {}",
                self.size
            )));
        }
        if !(self.exposure.min > 0.0) || self.exposure.max < self.exposure.min {
            return Err(Error::InvalidParameter(format!(
                "exposure range must be positive, got {:?}",
                self.exposure
            )));
        }
        if self.spline_jitter < 0.0 {
            return Err(Error::InvalidParameter("negative spline jitter".into()));
        }
        self.tremor.validate()
    }

    fn spline_grid(&self) -> usize {
        self.spline_grid.unwrap_or(self.size / 2).max(3)
    }

    pub fn sample_trajectory(&self, rng: &mut dyn RngCore) -> Result<Trajectory> {
        match self.model {
            KernelModel::Tremor => {
                let exposure = self.exposure.sample(rng);
                sample_tremor_trajectory_with(exposure, &self.tremor, rng)
            }
            KernelModel::Spline6 => sample_spline_trajectory(rng, self.spline_grid()),
            KernelModel::Linear3d => {
                let params = self
                    .linear3d
                    .unwrap_or_else(|| Linear3dParams::for_kernel_size(self.size));
                sample_linear3d_trajectory_with(&params, rng)
            }
        }
    }

    /// Draws one kernel, resampling up to [`MAX_OVERFLOW_RETRIES`] times when
    /// the trajectory does not fit the window.
    pub fn generate(&self, rng: &mut dyn RngCore) -> Result<BlurKernel> {
        self.validate()?;
        let mut last = None;
        for _ in 0..=MAX_OVERFLOW_RETRIES {
            let traj = self.sample_trajectory(rng)?;
            match rasterize_kernel(&traj, self.size) {
                Ok(k) => return self.finish(k, rng),
                Err(e @ Error::KernelOverflow { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn finish(&self, k: BlurKernel, rng: &mut dyn RngCore) -> Result<BlurKernel> {
        if self.model != KernelModel::Spline6 || self.spline_jitter == 0.0 {
            return Ok(k);
        }
        // Each covered pixel takes a value from a narrow Gaussian around its
        // deposited weight.
        let size = k.size();
        let weights = k
            .weights()
            .iter()
            .map(|&w| {
                if w > 0.0 {
                    let z: f64 = StandardNormal.sample(rng);
                    (w * (1.0 + self.spline_jitter * z)).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        match BlurKernel::new(size, weights)?.normalized() {
            Ok(jittered) => Ok(center_kernel(&jittered)),
            // Every weight clamped away; keep the un-jittered kernel.
            Err(_) => Ok(k),
        }
    }

    /// Kernel `index` of the batch defined by `self.seed`. Each index uses its
    /// own ChaCha stream, so batches can be produced in any order.
    pub fn generate_indexed(&self, index: u64) -> Result<BlurKernel> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        self.generate(&mut rng)
    }

    pub fn generate_batch(&self, count: usize) -> Result<Vec<BlurKernel>> {
        use rayon::prelude::*;
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.generate_indexed(i))
            .collect()
    }
}

impl KernelSource for KernelGeneratorSpec {
    fn draw(&self, _region: usize, rng: &mut dyn RngCore) -> Result<BlurKernel> {
        self.generate(rng)
    }
}

/// Hands out `kernels[region % len]`, ignoring the random source.
#[derive(Debug, Clone)]
pub struct FixedKernels {
    kernels: Vec<BlurKernel>,
}

impl FixedKernels {
    pub fn new(kernels: Vec<BlurKernel>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::InvalidParameter("no kernels given".into()));
        }
        Ok(Self { kernels })
    }

    pub fn delta(size: usize) -> Result<Self> {
        Self::new(vec![BlurKernel::delta(size)?])
    }
}

impl KernelSource for FixedKernels {
    fn draw(&self, region: usize, _rng: &mut dyn RngCore) -> Result<BlurKernel> {
        Ok(self.kernels[region % self.kernels.len()].clone())
    }
}
