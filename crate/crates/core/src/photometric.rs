//! HSV-space illumination augmentation applied to the sharp image before
//! blurring.
//!
//! Two schemes are implemented. Exposure jitter scales the value channel of
//! the whole image by one gain in `[0.5, 1.5]`. Light-source synthesis
//! scales non-source pixels by `0.25 + l` (`l` in `[0, 0.75]`, so never
//! brighter than the input) and the pixels of a saturation mask by
//! `0.25 + l + s` (`s` in `[0, 1]`), which pushes light sources above 1 so
//! that the final clip saturates them after blurring.
//!
//! HSV follows the hexcone model with `h` in `[0, 1)` and `s, v` in `[0, 1]`.
//! Single-channel images are treated as their own value channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub const V_GAIN_RANGE: (f64, f64) = (0.5, 1.5);
pub const L_RANGE: (f64, f64) = (0.0, 0.75);
pub const S_RANGE: (f64, f64) = (0.0, 1.0);
pub const BASE_GAIN: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IllumMode {
    #[default]
    Identity,
    DynamicScenes,
    VaryingIllum,
}

/// The random draws behind one augmentation, kept for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IllumDraw {
    Identity,
    DynamicScenes { v_gain: f64 },
    VaryingIllum { l: f64, s: f64 },
}

impl IllumDraw {
    pub fn mode(&self) -> IllumMode {
        match self {
            IllumDraw::Identity => IllumMode::Identity,
            IllumDraw::DynamicScenes { .. } => IllumMode::DynamicScenes,
            IllumDraw::VaryingIllum { .. } => IllumMode::VaryingIllum,
        }
    }

    /// Checks that every draw lies in its interval.
    pub fn validate(&self) -> Result<()> {
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        let ok = match *self {
            IllumDraw::Identity => true,
            IllumDraw::DynamicScenes { v_gain } => within(v_gain, V_GAIN_RANGE),
            IllumDraw::VaryingIllum { l, s } => within(l, L_RANGE) && within(s, S_RANGE),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "draw out of range: {self:?}"
            )))
        }
    }
}

/// Binary mask of light-source pixels (single channel, `> 0.5` is set).
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationMask(Image);

impl SaturationMask {
    pub fn new(mask: Image) -> Result<Self> {
        if mask.channels() != 1 {
            return Err(Error::InvalidInput(
                "saturation mask must have one channel".into(),
            ));
        }
        mask.check_range(0.0, 1.0)?;
        Ok(Self(mask))
    }

    pub fn image(&self) -> &Image {
        &self.0
    }

    #[inline]
    pub fn is_set(&self, y: usize, x: usize) -> bool {
        self.0.get(y, x, 0) > 0.5
    }

    /// Fraction of the image area covered by the mask.
    pub fn coverage(&self) -> f64 {
        let set = self.0.data().iter().filter(|&&v| v > 0.5).count();
        set as f64 / self.0.pixel_count().max(1) as f64
    }
}

/// Hexcone RGB -> HSV for one pixel.
pub fn rgb_to_hsv_pixel(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    (if h >= 1.0 { 0.0 } else { h }, s, v)
}

pub fn hsv_to_rgb_pixel(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    if s == 0.0 {
        return (v, v, v);
    }
    let h6 = (h * 6.0).rem_euclid(6.0);
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

fn require_rgb(img: &Image) -> Result<()> {
    if img.channels() == 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a 3-channel image, got {}",
            img.channels()
        )))
    }
}

fn map_pixels(img: &Image, f: impl Fn(f64, f64, f64) -> (f64, f64, f64)) -> Image {
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        let (a, b, c) = f(px[0] as f64, px[1] as f64, px[2] as f64);
        px[0] = a as f32;
        px[1] = b as f32;
        px[2] = c as f32;
    }
    out
}

/// RGB in `[0, 1]` to an HSV image (channels `h, s, v`).
pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    require_rgb(img)?;
    img.check_range(0.0, 1.0)?;
    Ok(map_pixels(img, rgb_to_hsv_pixel))
}

/// HSV back to RGB. `v` may exceed 1 (brightened images).
pub fn hsv_to_rgb(img: &Image) -> Result<Image> {
    require_rgb(img)?;
    for px in img.data().chunks_exact(3) {
        let ok = (0.0..=1.0).contains(&px[0])
            && (0.0..=1.0).contains(&px[1])
            && px[2] >= 0.0
            && px[2].is_finite();
        if !ok {
            return Err(Error::InvalidInput(format!("invalid hsv pixel {px:?}")));
        }
    }
    Ok(map_pixels(img, hsv_to_rgb_pixel))
}

/// Multiplies the value channel by `gain(y, x)`.
fn scale_value(img: &Image, gain: impl Fn(usize, usize) -> f64) -> Result<Image> {
    img.check_range(0.0, 1.0)?;
    let (h, w, channels) = img.dims();
    if channels == 1 {
        return Ok(Image::from_fn(h, w, 1, |y, x, _| {
            (img.get(y, x, 0) as f64 * gain(y, x)) as f32
        }));
    }
    let mut out = img.clone();
    for (i, px) in out.data_mut().chunks_exact_mut(3).enumerate() {
        let (hue, sat, val) = rgb_to_hsv_pixel(px[0] as f64, px[1] as f64, px[2] as f64);
        let (r, g, b) = hsv_to_rgb_pixel(hue, sat, val * gain(i / w, i % w));
        px[0] = r as f32;
        px[1] = g as f32;
        px[2] = b as f32;
    }
    Ok(out)
}

/// Exposure jitter with an explicit gain. The result is not clipped.
pub fn apply_value_gain(img: &Image, gain: f64) -> Result<Image> {
    if !(gain >= 0.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid gain {gain}")));
    }
    scale_value(img, |_, _| gain)
}

/// Exposure jitter: one gain drawn from `[0.5, 1.5]` for the whole image.
pub fn dynamic_scene_illum<R: Rng + ?Sized>(
    img: &Image,
    rng: &mut R,
) -> Result<(Image, IllumDraw)> {
    let v_gain = rng.random_range(V_GAIN_RANGE.0..=V_GAIN_RANGE.1);
    let out = apply_value_gain(img, v_gain)?;
    Ok((out, IllumDraw::DynamicScenes { v_gain }))
}

/// Light-source synthesis with explicit draws. The result is not clipped.
pub fn apply_varying_illum(img: &Image, mask: &SaturationMask, l: f64, s: f64) -> Result<Image> {
    IllumDraw::VaryingIllum { l, s }.validate()?;
    if mask.image().height() != img.height() || mask.image().width() != img.width() {
        return Err(Error::shape(
            format!("{}x{} mask", img.height(), img.width()),
            format!("{}x{}", mask.image().height(), mask.image().width()),
        ));
    }
    let base = BASE_GAIN + l;
    let lit = BASE_GAIN + l + s;
    scale_value(img, |y, x| if mask.is_set(y, x) { lit } else { base })
}

/// Light-source synthesis: one `(l, s)` draw per call.
pub fn varying_illum<R: Rng + ?Sized>(
    img: &Image,
    mask: &SaturationMask,
    rng: &mut R,
) -> Result<(Image, IllumDraw)> {
    let l = rng.random_range(L_RANGE.0..=L_RANGE.1);
    let s = rng.random_range(S_RANGE.0..=S_RANGE.1);
    let out = apply_varying_illum(img, mask, l, s)?;
    Ok((out, IllumDraw::VaryingIllum { l, s }))
}
