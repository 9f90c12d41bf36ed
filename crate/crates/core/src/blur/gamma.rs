//! Gamma approximation of the camera response function.
//!
//! Pixels are obtained from photons (linear irradiance) by `x^(1/gamma)`;
//! the inverse `x^gamma` takes pixels back to photon space, where blur
//! composes by plain averaging.

use crate::error::{Error, Result};
use crate::image::Image;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )))
    }
}

/// Scalar CRF: photons to pixel value.
#[inline]
pub fn encode_value(x: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        x
    } else {
        x.powf(1.0 / gamma)
    }
}

/// Scalar inverse CRF: pixel value to photons.
#[inline]
pub fn decode_value(x: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        x
    } else {
        x.powf(gamma)
    }
}

/// Photon space to pixel space. Values above 1 are allowed (and stay above 1).
pub fn gamma_encode(photons: &Image, gamma: f64) -> Result<Image> {
    check_gamma(gamma)?;
    photons.check_range(0.0, f32::MAX).map_err(|_| {
        Error::InvalidInput("gamma_encode needs finite non-negative photons".into())
    })?;
    Ok(photons.map(|v| encode_value(v as f64, gamma) as f32))
}

/// Pixel space (`[0, 1]`) to photon space.
pub fn gamma_decode(pixels: &Image, gamma: f64) -> Result<Image> {
    check_gamma(gamma)?;
    pixels.check_range(0.0, 1.0)?;
    Ok(pixels.map(|v| decode_value(v as f64, gamma) as f32))
}

/// Frame-averaging blur: the CRF applied to the mean of photon-space frames.
pub fn average_frames(frames: &[Image], gamma: f64) -> Result<Image> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidParameter("no frames to average".into()))?;
    for f in &frames[1..] {
        first.ensure_same_shape(f)?;
    }
    let n = frames.len() as f64;
    let mut acc = vec![0.0f64; first.data().len()];
    for f in frames {
        for (a, &v) in acc.iter_mut().zip(f.data()) {
            *a += v as f64;
        }
    }
    let (h, w, c) = first.dims();
    let mean = Image::from_vec(h, w, c, acc.iter().map(|a| (a / n) as f32).collect())?;
    gamma_encode(&mean, gamma)
}
