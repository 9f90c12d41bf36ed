//! Source filtering: which objects get their own kernel and which images
//! qualify for light-source synthesis.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::GenerationConfig;
use super::manifest::{ManifestEntry, SourceManifest};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{read_binary_mask, read_png};

/// An object mask with its labels, as loaded from a manifest entry.
#[derive(Debug, Clone)]
pub struct LoadedObject {
    /// Position in the entry's object list.
    pub index: usize,
    pub class: String,
    pub supercategory: String,
    pub mask: Image,
}

impl LoadedObject {
    pub fn area(&self) -> usize {
        mask_area(&self.mask)
    }
}

pub fn mask_area(mask: &Image) -> usize {
    mask.data().iter().filter(|&&v| v > 0.5).count()
}

/// Loads every object mask of `entry`.
pub fn load_objects(entry: &ManifestEntry, manifest: &SourceManifest) -> Result<Vec<LoadedObject>> {
    entry
        .objects
        .iter()
        .enumerate()
        .map(|(index, o)| {
            Ok(LoadedObject {
                index,
                class: o.class.clone(),
                supercategory: manifest
                    .supercategory(&o.class)
                    .unwrap_or_default()
                    .to_string(),
                mask: read_binary_mask(&o.mask)?,
            })
        })
        .collect()
}

/// Objects that receive their own kernel: a moving supercategory and at least
/// `min_object_area` pixels. When more qualify than `max_objects`, the
/// largest are kept (ties go to the earlier object). The result is in entry
/// order.
pub fn select_objects<'a>(
    objects: &'a [LoadedObject],
    cfg: &GenerationConfig,
) -> Vec<&'a LoadedObject> {
    let mut qualifying: Vec<(usize, &LoadedObject)> = objects
        .iter()
        .filter(|o| cfg.moving_supercategories.contains(&o.supercategory))
        .map(|o| (o.area(), o))
        .filter(|&(area, _)| area >= cfg.min_object_area)
        .collect();
    qualifying.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.index.cmp(&b.1.index)));
    qualifying.truncate(cfg.max_objects);
    qualifying.sort_by_key(|&(_, o)| o.index);
    qualifying.into_iter().map(|(_, o)| o).collect()
}

/// Fraction of pixels whose brightest channel, quantized to 8 bits, exceeds
/// `level`.
pub fn bright_fraction(img: &Image, level: u8) -> f64 {
    let c = img.channels();
    let bright = img
        .data()
        .chunks_exact(c)
        .filter(|px| {
            let max = px.iter().fold(0.0f32, |m, &v| m.max(v));
            (max.clamp(0.0, 1.0) * 255.0).round() > level as f32
        })
        .count();
    bright as f64 / img.pixel_count().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum IllumRejection {
    NoLightSource,
    ExcludedClass { class: String },
    TooBright { fraction: f64 },
}

impl fmt::Display for IllumRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllumRejection::NoLightSource => write!(f, "no light-source object"),
            IllumRejection::ExcludedClass { class } => {
                write!(f, "contains excluded class `{class}`")
            }
            IllumRejection::TooBright { fraction } => {
                write!(f, "{:.4}% of pixels are already bright", fraction * 100.0)
            }
        }
    }
}

/// Light-source eligibility from class labels and the sharp image alone.
pub fn check_illum_source(
    image: &Image,
    classes: &[(&str, &str)],
    cfg: &GenerationConfig,
) -> Result<(), IllumRejection> {
    if let Some((class, _)) = classes
        .iter()
        .find(|(_, sc)| cfg.excluded_supercategories.iter().any(|e| e == sc))
    {
        return Err(IllumRejection::ExcludedClass {
            class: class.to_string(),
        });
    }
    if !classes
        .iter()
        .any(|(_, sc)| cfg.light_supercategories.iter().any(|l| l == sc))
    {
        return Err(IllumRejection::NoLightSource);
    }
    let fraction = bright_fraction(image, cfg.bright_level);
    if fraction > cfg.max_bright_fraction {
        return Err(IllumRejection::TooBright { fraction });
    }
    Ok(())
}

/// Checks one manifest entry for light-source synthesis.
pub fn check_illum_entry(
    entry: &ManifestEntry,
    manifest: &SourceManifest,
    cfg: &GenerationConfig,
) -> Result<Result<(), IllumRejection>> {
    let classes: Vec<(&str, &str)> = entry
        .objects
        .iter()
        .map(|o| {
            (
                o.class.as_str(),
                manifest.supercategory(&o.class).unwrap_or_default(),
            )
        })
        .collect();
    // Label checks first so rejected images need not be decoded.
    let empty = Image::zeros(1, 1, 1);
    if let Err(r @ (IllumRejection::ExcludedClass { .. } | IllumRejection::NoLightSource)) =
        check_illum_source(&empty, &classes, cfg)
    {
        return Ok(Err(r));
    }
    let image = read_png(&entry.image)?;
    Ok(check_illum_source(&image, &classes, cfg))
}

/// Entries eligible for light-source synthesis, plus the reasons for every
/// rejection.
pub fn select_illum_images(
    manifest: &SourceManifest,
    cfg: &GenerationConfig,
) -> Result<(SourceManifest, Vec<(String, IllumRejection)>)> {
    let mut rejected = Vec::new();
    let mut keep = std::collections::BTreeSet::new();
    for e in &manifest.entries {
        match check_illum_entry(e, manifest, cfg)? {
            Ok(()) => {
                keep.insert(e.id.clone());
            }
            Err(r) => rejected.push((e.id.clone(), r)),
        }
    }
    Ok((manifest.filtered(|e| keep.contains(&e.id)), rejected))
}

/// Files whose union is the light-source mask of an entry: the manifest's
/// saturation mask if given, else every light-class object mask.
pub fn saturation_sources(
    entry: &ManifestEntry,
    manifest: &SourceManifest,
    cfg: &GenerationConfig,
) -> Vec<PathBuf> {
    if let Some(path) = &entry.saturation_mask {
        return vec![path.clone()];
    }
    entry
        .objects
        .iter()
        .filter(|o| {
            let sc = manifest.supercategory(&o.class).unwrap_or_default();
            cfg.light_supercategories.iter().any(|l| l == sc)
        })
        .map(|o| o.mask.clone())
        .collect()
}

/// Union of binary mask files; an empty list gives an all-zero mask.
pub fn union_masks(paths: &[PathBuf], height: usize, width: usize) -> Result<Image> {
    let mut mask = Image::zeros(height, width, 1);
    for p in paths {
        let m = read_binary_mask(p)?;
        if m.height() != height || m.width() != width {
            return Err(Error::shape(
                format!("{height}x{width} mask"),
                format!("{}x{} in {}", m.height(), m.width(), p.display()),
            ));
        }
        for (d, &v) in mask.data_mut().iter_mut().zip(m.data()) {
            if v > 0.5 {
                *d = 1.0;
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn object(index: usize, supercategory: &str, area: usize) -> LoadedObject {
        let mut mask = Image::zeros(50, 50, 1);
        for v in mask.data_mut().iter_mut().take(area) {
            *v = 1.0;
        }
        LoadedObject {
            index,
            class: format!("{supercategory}{index}"),
            supercategory: supercategory.into(),
            mask,
        }
    }

    fn indices(sel: &[&LoadedObject]) -> Vec<usize> {
        sel.iter().map(|o| o.index).collect()
    }

    #[test]
    fn largest_objects_win_and_order_is_kept() {
        let cfg = GenerationConfig::default();
        let objs = [
            object(0, "animal", 500),
            object(1, "vehicle", 900),
            object(2, "person", 700),
        ];
        assert_eq!(indices(&select_objects(&objs, &cfg)), vec![1, 2]);
    }

    #[test]
    fn ties_prefer_earlier_objects() {
        let cfg = GenerationConfig::default();
        let objs = [
            object(0, "animal", 600),
            object(1, "animal", 600),
            object(2, "animal", 600),
        ];
        assert_eq!(indices(&select_objects(&objs, &cfg)), vec![0, 1]);
    }

    #[test]
    fn bright_fraction_uses_the_brightest_channel() {
        let mut img = Image::filled(10, 10, 3, 0.5);
        img.set(0, 0, 2, 251.0 / 255.0);
        img.set(0, 1, 0, 250.0 / 255.0);
        assert_eq!(bright_fraction(&img, 250), 0.01);
    }
}
