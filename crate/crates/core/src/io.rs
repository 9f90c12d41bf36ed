//! File formats: PNG images, raw `f32` rasters for soft masks, and kernel
//! visualizations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::kernel::BlurKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BitDepth {
    #[default]
    #[serde(rename = "8")]
    Eight,
    #[serde(rename = "16")]
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> f32 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

fn png_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Reads an 8- or 16-bit PNG into `[0, 1]`. Gray and gray+alpha give one
/// channel, RGB and RGBA give three; alpha is discarded.
pub fn read_png(path: &Path) -> Result<Image> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| png_err(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| png_err(path, e))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let stride = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(png_err(path, "unexpanded palette")),
    };
    let channels = if stride <= 2 { 1 } else { 3 };
    let samples: Vec<f32> = match info.bit_depth {
        png::BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0)
            .collect(),
        png::BitDepth::Eight => buf[..info.buffer_size()]
            .iter()
            .map(|&b| b as f32 / 255.0)
            .collect(),
        d => return Err(png_err(path, format!("unsupported bit depth {d:?}"))),
    };
    let mut data = Vec::with_capacity(h * w * channels);
    for row in samples.chunks_exact(w * stride) {
        for px in row.chunks_exact(stride) {
            data.extend_from_slice(&px[..channels]);
        }
    }
    Image::from_vec(h, w, channels, data)
}

/// Quantizes `[0, 1]` samples (clamped) to the given depth.
pub fn encode_png(img: &Image, depth: BitDepth) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        let max = depth.max_value();
        let quant = |v: f32| (v.clamp(0.0, 1.0) * max).round();
        let bytes: Vec<u8> = match depth {
            BitDepth::Eight => {
                enc.set_depth(png::BitDepth::Eight);
                img.data().iter().map(|&v| quant(v) as u8).collect()
            }
            BitDepth::Sixteen => {
                enc.set_depth(png::BitDepth::Sixteen);
                img.data()
                    .iter()
                    .flat_map(|&v| (quant(v) as u16).to_be_bytes())
                    .collect()
            }
        };
        let mut writer = enc
            .write_header()
            .map_err(|e| png_err(Path::new("<memory>"), e))?;
        writer
            .write_image_data(&bytes)
            .map_err(|e| png_err(Path::new("<memory>"), e))?;
        writer
            .finish()
            .map_err(|e| png_err(Path::new("<memory>"), e))?;
    }
    Ok(out)
}

pub fn write_png(path: &Path, img: &Image, depth: BitDepth) -> Result<()> {
    write_bytes(path, &encode_png(img, depth)?)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads a PNG as a binary mask: a pixel is set when any channel is non-zero.
pub fn read_binary_mask(path: &Path) -> Result<Image> {
    let img = read_png(path)?;
    let c = img.channels();
    let data = img
        .data()
        .chunks_exact(c)
        .map(|px| px.iter().any(|&v| v > 0.0) as u8 as f32)
        .collect();
    Image::from_vec(img.height(), img.width(), 1, data)
}

/// Single-channel `f32` raster: header `{H: u32, W: u32}` (little endian)
/// followed by `H * W` little-endian floats.
pub fn raster_to_bytes(img: &Image) -> Result<Vec<u8>> {
    if img.channels() != 1 {
        return Err(Error::InvalidInput("raster files hold one channel".into()));
    }
    let mut out = Vec::with_capacity(8 + 4 * img.data().len());
    out.extend_from_slice(&(img.height() as u32).to_le_bytes());
    out.extend_from_slice(&(img.width() as u32).to_le_bytes());
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn raster_from_bytes(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 8 {
        return Err(Error::InvalidInput("raster shorter than its header".into()));
    }
    let h = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != 4 * h * w {
        return Err(Error::InvalidInput(format!(
            "raster {h}x{w} expects {} bytes, found {}",
            4 * h * w,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Image::from_vec(h, w, 1, data)
}

/// 16-bit grayscale PNG of a kernel scaled so its largest weight is white.
pub fn encode_kernel_png(k: &BlurKernel) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, k.size() as u32, k.size() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let bytes: Vec<u8> = k
            .to_visual_u16()
            .into_iter()
            .flat_map(u16::to_be_bytes)
            .collect();
        let err = |e: png::EncodingError| png_err(Path::new("<kernel>"), e);
        let mut writer = enc.write_header().map_err(err)?;
        writer.write_image_data(&bytes).map_err(err)?;
        writer.finish().map_err(err)?;
    }
    Ok(out)
}
