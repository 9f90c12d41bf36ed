//! Piecewise-constant non-uniform blur: per-region kernels blended by soft
//! masks that form a partition of unity.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::BlurKernel;

use super::convolve::{
    convolve_plane_direct, convolve_planes_fft, recycle, resolve_backend, Backend, Boundary, Fft2d,
    Field,
};

/// Tolerance on the per-pixel mask sum.
pub const PARTITION_TOLERANCE: f64 = 1e-6;

/// Soft region masks (single channel, index 0 = background) and the kernel
/// applied to each region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    masks: Vec<Image>,
    kernels: Vec<BlurKernel>,
}

impl RegionSet {
    pub fn new(masks: Vec<Image>, kernels: Vec<BlurKernel>) -> Result<Self> {
        if masks.is_empty() || masks.len() != kernels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} masks for {} kernels",
                masks.len(),
                kernels.len()
            )));
        }
        let (h, w, _) = masks[0].dims();
        for m in &masks {
            if m.dims() != (h, w, 1) {
                return Err(Error::shape(
                    format!("({h}, {w}, 1)"),
                    format!("{:?}", m.dims()),
                ));
            }
            m.check_range(0.0, 1.0)?;
        }
        let set = Self { masks, kernels };
        let err = set.partition_error();
        if err >= PARTITION_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "masks are not a partition of unity (max error {err:e})"
            )));
        }
        Ok(set)
    }

    /// A single region covering the whole image.
    pub fn uniform(height: usize, width: usize, kernel: BlurKernel) -> Self {
        Self {
            masks: vec![Image::filled(height, width, 1, 1.0)],
            kernels: vec![kernel],
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[Image] {
        &self.masks
    }

    pub fn kernels(&self) -> &[BlurKernel] {
        &self.kernels
    }

    pub fn height(&self) -> usize {
        self.masks[0].height()
    }

    pub fn width(&self) -> usize {
        self.masks[0].width()
    }

    /// Largest per-pixel deviation of the mask sum from one.
    pub fn partition_error(&self) -> f64 {
        partition_error(&self.masks)
    }
}

pub fn partition_error(masks: &[Image]) -> f64 {
    let Some(first) = masks.first() else {
        return f64::INFINITY;
    };
    (0..first.data().len())
        .map(|i| {
            let s: f64 = masks.iter().map(|m| m.data()[i] as f64).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Softens object masks with their own kernels and derives the background.
///
/// `kernels[0]` is the background kernel and `kernels[i + 1]` belongs to
/// `object_masks[i]`. Each object mask is convolved with its kernel, the
/// background is `1 - sum(objects)`, and every pixel is clamped to `[0, 1]`
/// and renormalized so overlapping objects still sum to one. Empty object
/// masks are dropped together with their kernel.
pub fn smooth_region_masks(
    object_masks: &[Image],
    kernels: &[BlurKernel],
    boundary: Boundary,
) -> Result<RegionSet> {
    if kernels.len() != object_masks.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} kernels (background + objects), got {}",
            object_masks.len() + 1,
            kernels.len()
        )));
    }
    let Some(first) = object_masks.first() else {
        return Err(Error::InvalidParameter(
            "no object masks; use RegionSet::uniform for background-only blur".into(),
        ));
    };
    let (h, w) = (first.height(), first.width());

    let mut planes: Vec<Vec<f64>> = Vec::with_capacity(object_masks.len());
    let mut kept = vec![kernels[0].clone()];
    for (i, (mask, k)) in object_masks.iter().zip(&kernels[1..]).enumerate() {
        if mask.dims() != (h, w, 1) {
            return Err(Error::shape(
                format!("({h}, {w}, 1)"),
                format!("{:?}", mask.dims()),
            ));
        }
        mask.check_range(0.0, 1.0)?;
        if mask.data().iter().all(|&v| v == 0.0) {
            log::warn!("object mask {i} is empty, dropping it");
            continue;
        }
        planes.push(mask.plane(0));
        kept.push(k.clone());
    }
    let max_size = kept[1..].iter().map(BlurKernel::size).max().unwrap_or(1);
    if max_size > h.min(w) {
        return Err(Error::InvalidParameter(format!(
            "{max_size}x{max_size} kernel is larger than the {h}x{w} image"
        )));
    }
    let convolved = match resolve_backend(Backend::Auto, h, w, max_size) {
        Backend::Fft => {
            let jobs: Vec<(&[f64], &BlurKernel)> =
                planes.iter().map(Vec::as_slice).zip(&kept[1..]).collect();
            convolve_planes_fft(&jobs, h, w, boundary)
        }
        _ => planes
            .iter()
            .zip(&kept[1..])
            .map(|(p, k)| convolve_plane_direct(p, h, w, k, boundary))
            .collect(),
    };
    let mut smoothed: Vec<Vec<f64>> = convolved
        .into_iter()
        .map(|p| p.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
        .collect();

    let mut background = vec![0.0f64; h * w];
    for (p, bg) in background.iter_mut().enumerate() {
        let objects: f64 = smoothed.iter().map(|m| m[p]).sum();
        let b = (1.0 - objects).clamp(0.0, 1.0);
        let total = b + objects;
        *bg = b / total;
        for m in smoothed.iter_mut() {
            m[p] /= total;
        }
    }

    let to_image = |plane: &[f64]| {
        let mut img = Image::zeros(h, w, 1);
        img.set_plane(0, plane);
        img
    };
    let mut masks = vec![to_image(&background)];
    masks.extend(smoothed.iter().map(|m| to_image(m)));
    RegionSet::new(masks, kept)
}

/// `sum_b m_b .* (k_b * u)` in photon space. The result is not clipped.
pub fn compose_nonuniform(
    photons: &Image,
    regions: &RegionSet,
    boundary: Boundary,
) -> Result<Image> {
    let (h, w, channels) = photons.dims();
    if regions.height() != h || regions.width() != w {
        return Err(Error::shape(
            format!("{h}x{w} regions"),
            format!("{}x{}", regions.height(), regions.width()),
        ));
    }
    let max_size = regions
        .kernels()
        .iter()
        .map(BlurKernel::size)
        .max()
        .unwrap_or(1);
    if max_size > h.min(w) {
        return Err(Error::InvalidParameter(format!(
            "{max_size}x{max_size} kernel is larger than the {h}x{w} image"
        )));
    }

    let masks: Vec<Vec<f64>> = regions.masks().iter().map(|m| m.plane(0)).collect();
    let mut out = Image::zeros(h, w, channels);
    match resolve_backend(Backend::Auto, h, w, max_size) {
        Backend::Fft => {
            let pad = max_size / 2;
            let fft = Fft2d::for_padded(h, w, pad);
            let kernels = regions.kernels();
            let planes: Vec<Vec<f64>> = (0..channels).map(|c| photons.plane(c)).collect();
            let fields: Vec<Field<'_>> = kernels
                .iter()
                .map(|k| Field::Kernel(k, pad))
                .chain(planes.iter().map(|plane| Field::Padded {
                    plane,
                    h,
                    w,
                    pad,
                    boundary,
                }))
                .collect();
            let mut spectra = fft.spectra(&fields);
            let img = spectra.split_off(kernels.len());
            let ker = spectra;
            let jobs: Vec<(usize, usize)> = (0..channels)
                .flat_map(|c| (0..kernels.len()).map(move |r| (c, r)))
                .collect();
            let mut acc = vec![vec![0.0f64; h * w]; channels];
            // Two products per inverse transform keeps memory bounded.
            for chunk in jobs.chunks(2) {
                let products = chunk
                    .iter()
                    .map(|&(c, r)| fft.product(&img[c], &ker[r]))
                    .collect();
                fft.real_inverses_into(products, h, w, pad, |j, y, row| {
                    let (c, r) = chunk[j];
                    let span = y * w..(y + 1) * w;
                    accumulate(&mut acc[c][span.clone()], &masks[r][span], row);
                });
            }
            ker.into_iter().chain(img).for_each(recycle);
            for (c, plane) in acc.iter().enumerate() {
                out.set_plane(c, plane);
            }
        }
        _ => {
            for c in 0..channels {
                let plane = photons.plane(c);
                let mut acc = vec![0.0f64; h * w];
                for (mask, k) in masks.iter().zip(regions.kernels()) {
                    let blurred = convolve_plane_direct(&plane, h, w, k, boundary);
                    accumulate(&mut acc, mask, &blurred);
                }
                out.set_plane(c, &acc);
            }
        }
    }
    Ok(out)
}

#[inline]
fn accumulate(acc: &mut [f64], mask: &[f64], blurred: &[f64]) {
    for ((a, &m), &b) in acc.iter_mut().zip(mask).zip(blurred) {
        *a += m * b;
    }
}
