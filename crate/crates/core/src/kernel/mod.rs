//! Camera-shake blur kernels: trajectory sampling, rasterization and
//! center-of-mass canonicalization.

mod generator;
mod raster;
pub mod trajectory;

pub use generator::{
    ExposureRange, FixedKernels, KernelGeneratorSpec, KernelModel, KernelSource,
    MAX_OVERFLOW_RETRIES,
};
pub use raster::{rasterize_kernel, rasterize_kernel_uncentered, splat_bilinear};
pub use trajectory::{
    catmull_rom_path, project_camera_motion, sample_linear3d_trajectory,
    sample_linear3d_trajectory_with, sample_spline_trajectory, sample_tremor_trajectory,
    sample_tremor_trajectory_with, CameraMotion, Linear3dParams, Point, Trajectory, TremorParams,
};

use crate::error::{Error, Result};

/// Tolerance on the unit-sum invariant.
pub const SUM_TOLERANCE: f64 = 1e-6;
/// Maximum distance between the center of mass and the window center.
pub const COM_TOLERANCE: f64 = 0.5;

/// A `KxK` non-negative, unit-sum point spread function (`K` odd).
///
/// Weights are stored row-major; `weights[y * K + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    size: usize,
    weights: Vec<f64>,
}

impl BlurKernel {
    /// Wraps raw weights after checking shape, sign and finiteness. The sum is
    /// not checked; see [`BlurKernel::normalized`] and [`BlurKernel::validate`].
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || size == 0 {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be odd, got {size}"
            )));
        }
        if weights.len() != size * size {
            return Err(Error::shape(
                format!("{} weights", size * size),
                format!("{} weights", weights.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput(
                "kernel weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { size, weights })
    }

    pub fn delta(size: usize) -> Result<Self> {
        let mut weights = vec![0.0; size * size];
        let c = size / 2;
        if let Some(w) = weights.get_mut(c * size + c) {
            *w = 1.0;
        }
        Self::new(size, weights)
    }

    pub fn box_filter(size: usize) -> Result<Self> {
        let n = (size * size) as f64;
        Self::new(size, vec![1.0 / n; size * size])
    }

    /// Scales the weights to unit sum.
    pub fn normalized(mut self) -> Result<Self> {
        let sum = self.sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidInput("kernel has zero mass".into()));
        }
        self.weights.iter_mut().for_each(|w| *w /= sum);
        Ok(self)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.weights[y * self.size + x]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Center of mass as `(x, y)` in window coordinates.
    pub fn center_of_mass(&self) -> (f64, f64) {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut total = 0.0;
        for y in 0..self.size {
            for x in 0..self.size {
                let w = self.at(y, x);
                sx += w * x as f64;
                sy += w * y as f64;
                total += w;
            }
        }
        if total > 0.0 {
            (sx / total, sy / total)
        } else {
            let c = self.radius() as f64;
            (c, c)
        }
    }

    /// Euclidean distance from the center of mass to the window center.
    pub fn com_offset(&self) -> f64 {
        let c = self.radius() as f64;
        let (x, y) = self.center_of_mass();
        (x - c).hypot(y - c)
    }

    /// Checks every kernel invariant: non-negative, unit sum, centered.
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("negative kernel weight".into()));
        }
        let sum = self.sum();
        if (sum - 1.0).abs() >= SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!("kernel sums to {sum}")));
        }
        let off = self.com_offset();
        if off >= COM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "kernel center of mass is {off:.3} px off center"
            )));
        }
        Ok(())
    }

    /// Side of the smallest square window holding all non-zero weights.
    pub fn support(&self) -> (usize, usize) {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.size {
            for x in 0..self.size {
                if self.at(y, x) > 0.0 {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if x0 == usize::MAX {
            (0, 0)
        } else {
            (x1 - x0 + 1, y1 - y0 + 1)
        }
    }

    /// Little-endian binary: `{size: u32, reserved: u32}` then `size^2` f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.weights.len());
        out.extend_from_slice(&(self.size as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        for &w in &self.weights {
            out.extend_from_slice(&(w as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::InvalidInput(
                "kernel file shorter than header".into(),
            ));
        }
        let size = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let expected = 8 + 4 * size * size;
        if bytes.len() != expected {
            return Err(Error::InvalidInput(format!(
                "kernel file is {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let weights = bytes[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        Self::new(size, weights)
    }

    /// Weights scaled to the maximum and quantized to 16 bits, for viewing.
    pub fn to_visual_u16(&self) -> Vec<u16> {
        let max = self.weights.iter().cloned().fold(0.0, f64::max);
        self.weights
            .iter()
            .map(|&w| {
                if max > 0.0 {
                    (w / max * 65535.0).round() as u16
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Translates `k` so its center of mass sits on the window center.
///
/// The shift is split into an integer part and a bilinear fractional part.
/// Mass that would leave the window is folded onto the border, so the
/// operation is repeated until the residual offset is negligible.
pub fn center_kernel(k: &BlurKernel) -> BlurKernel {
    const MAX_PASSES: usize = 32;
    const STOP: f64 = 1e-9;

    let c = k.radius() as f64;
    let mut current = k.clone();
    for _ in 0..MAX_PASSES {
        let (mx, my) = current.center_of_mass();
        let (dx, dy) = (c - mx, c - my);
        if dx.abs() < STOP && dy.abs() < STOP {
            break;
        }
        current = shift_bilinear(&current, dx, dy);
    }
    current
}

fn shift_bilinear(k: &BlurKernel, dx: f64, dy: f64) -> BlurKernel {
    let n = k.size as isize;
    let (ix, fx) = (dx.floor() as isize, dx - dx.floor());
    let (iy, fy) = (dy.floor() as isize, dy - dy.floor());
    let taps = [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ];
    let mut out = vec![0.0; k.weights.len()];
    for y in 0..n {
        for x in 0..n {
            let w = k.weights[(y * n + x) as usize];
            if w == 0.0 {
                continue;
            }
            for &(ox, oy, t) in &taps {
                if t == 0.0 {
                    continue;
                }
                let tx = (x + ix + ox).clamp(0, n - 1);
                let ty = (y + iy + oy).clamp(0, n - 1);
                out[(ty * n + tx) as usize] += w * t;
            }
        }
    }
    BlurKernel {
        size: k.size,
        weights: out,
    }
}
