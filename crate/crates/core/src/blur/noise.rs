use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::Image;

/// Clips every sample to `[0, 1]`.
pub fn saturate(img: &Image) -> Image {
    img.map(|v| v.clamp(0.0, 1.0))
}

/// Adds i.i.d. zero-mean Gaussian noise. The result is not clipped.
pub fn add_noise<R: Rng + ?Sized>(img: &Image, std: f64, rng: &mut R) -> Result<Image> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise std must be >= 0, got {std}"
        )));
    }
    if std == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, std).expect("std validated above");
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = (*v as f64 + normal.sample(rng)) as f32;
    }
    Ok(out)
}
