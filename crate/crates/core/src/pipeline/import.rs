//! Converters from COCO-style and ADE20K-style annotations to a manifest
//! plus binary mask PNGs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::manifest::{ManifestEntry, ObjectAnnotation, SourceManifest};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{read_png, write_png, BitDepth};

/// Replaces characters that are not allowed in entry ids.
pub fn sanitize_id(raw: &str) -> String {
    let s: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let s = s.trim_start_matches('.').to_string();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Returns a PNG path for `src`, converting other formats into `out_dir/images`.
fn ensure_png(src: &Path, id: &str, out_dir: &Path) -> Result<PathBuf> {
    if is_png(src) {
        return std::path::absolute(src).map_err(|e| Error::io(src, e));
    }
    let dst = out_dir.join("images").join(format!("{id}.png"));
    let decoded =
        image::open(src).map_err(|e| Error::InvalidInput(format!("{}: {e}", src.display())))?;
    decoded
        .to_rgb8()
        .save(&dst)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", dst.display())))?;
    Ok(PathBuf::from("images").join(format!("{id}.png")))
}

fn write_mask(out_dir: &Path, name: &str, mask: &Image) -> Result<PathBuf> {
    let rel = PathBuf::from("masks").join(name);
    write_png(&out_dir.join(&rel), mask, BitDepth::Eight)?;
    Ok(rel)
}

fn create_dirs(out_dir: &Path) -> Result<()> {
    for d in ["images", "masks"] {
        let p = out_dir.join(d);
        std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn write_manifest(out_dir: &Path, manifest: &SourceManifest) -> Result<()> {
    crate::io::write_bytes(
        &out_dir.join("manifest.json"),
        manifest.to_json()?.as_bytes(),
    )
}

// ---------------------------------------------------------------- COCO

#[derive(Debug, Deserialize)]
struct CocoFile {
    images: Vec<CocoImage>,
    #[serde(default)]
    annotations: Vec<CocoAnnotation>,
    categories: Vec<CocoCategory>,
}

#[derive(Debug, Deserialize)]
struct CocoImage {
    id: u64,
    file_name: String,
    width: usize,
    height: usize,
}

#[derive(Debug, Deserialize)]
struct CocoCategory {
    id: u64,
    name: String,
    #[serde(default)]
    supercategory: String,
}

#[derive(Debug, Deserialize)]
struct CocoAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    segmentation: CocoSegmentation,
    #[serde(default)]
    iscrowd: u8,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CocoSegmentation {
    Polygons(Vec<Vec<f64>>),
    Rle { counts: RleCounts, size: [usize; 2] },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Runs(Vec<u64>),
    Compressed(String),
}

/// Fills polygons (flat `x0 y0 x1 y1 ...` lists) with the even-odd rule,
/// sampling pixel centers. Several polygons are united.
pub fn rasterize_polygons(polygons: &[Vec<f64>], height: usize, width: usize) -> Image {
    let mut mask = Image::zeros(height, width, 1);
    for poly in polygons {
        let pts: Vec<(f64, f64)> = poly.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        if pts.len() < 3 {
            continue;
        }
        for y in 0..height {
            let cy = y as f64 + 0.5;
            let mut xs: Vec<f64> = Vec::new();
            for i in 0..pts.len() {
                let (x0, y0) = pts[i];
                let (x1, y1) = pts[(i + 1) % pts.len()];
                if (y0 <= cy) != (y1 <= cy) {
                    xs.push(x0 + (cy - y0) / (y1 - y0) * (x1 - x0));
                }
            }
            xs.sort_by(f64::total_cmp);
            for span in xs.chunks_exact(2) {
                let start = (span[0] - 0.5).ceil().max(0.0) as usize;
                let end = ((span[1] - 0.5).ceil().max(0.0) as usize).min(width);
                for x in start..end {
                    mask.set(y, x, 0, 1.0);
                }
            }
        }
    }
    mask
}

/// Decodes the compact string form of COCO run lengths.
pub fn decode_rle_string(s: &str) -> Result<Vec<u64>> {
    let bytes = s.as_bytes();
    let mut counts: Vec<i64> = Vec::new();
    let mut p = 0;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0;
        loop {
            let c = *bytes
                .get(p)
                .ok_or_else(|| Error::InvalidInput("truncated RLE string".into()))?
                as i64
                - 48;
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        if counts.len() > 2 {
            x += counts[counts.len() - 2];
        }
        counts.push(x);
    }
    counts
        .into_iter()
        .map(|c| u64::try_from(c).map_err(|_| Error::InvalidInput("negative RLE run".into())))
        .collect()
}

/// Expands column-major run lengths (starting with background) to a mask.
pub fn decode_rle(counts: &[u64], height: usize, width: usize) -> Result<Image> {
    let mut flat = vec![0.0f32; height * width];
    let mut pos = 0usize;
    for (i, &run) in counts.iter().enumerate() {
        let end = pos + run as usize;
        if end > flat.len() {
            return Err(Error::InvalidInput("RLE runs exceed the mask size".into()));
        }
        if i % 2 == 1 {
            flat[pos..end].iter_mut().for_each(|v| *v = 1.0);
        }
        pos = end;
    }
    Ok(Image::from_fn(height, width, 1, |y, x, _| {
        flat[x * height + y]
    }))
}

fn coco_mask(seg: &CocoSegmentation, height: usize, width: usize) -> Result<Image> {
    match seg {
        CocoSegmentation::Polygons(p) => Ok(rasterize_polygons(p, height, width)),
        CocoSegmentation::Rle { counts, size } => {
            if size[0] != height || size[1] != width {
                return Err(Error::shape(
                    format!("{height}x{width}"),
                    format!("{}x{}", size[0], size[1]),
                ));
            }
            let runs = match counts {
                RleCounts::Runs(r) => r.clone(),
                RleCounts::Compressed(s) => decode_rle_string(s)?,
            };
            decode_rle(&runs, height, width)
        }
    }
}

/// Converts a COCO instances file. Crowd annotations are skipped.
pub fn import_coco(
    annotations: &Path,
    images_dir: &Path,
    out_dir: &Path,
) -> Result<SourceManifest> {
    let text = std::fs::read_to_string(annotations).map_err(|e| Error::io(annotations, e))?;
    let coco: CocoFile = serde_json::from_str(&text)?;
    create_dirs(out_dir)?;

    let names: BTreeMap<u64, &CocoCategory> = coco.categories.iter().map(|c| (c.id, c)).collect();
    let class_taxonomy = coco
        .categories
        .iter()
        .map(|c| (c.name.clone(), c.supercategory.clone()))
        .collect();
    let mut by_image: BTreeMap<u64, Vec<&CocoAnnotation>> = BTreeMap::new();
    for a in coco.annotations.iter().filter(|a| a.iscrowd == 0) {
        by_image.entry(a.image_id).or_default().push(a);
    }

    let mut entries = Vec::new();
    for img in &coco.images {
        let stem = Path::new(&img.file_name)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("image");
        let id = sanitize_id(stem);
        let image = ensure_png(&images_dir.join(&img.file_name), &id, out_dir)?;
        let mut objects = Vec::new();
        for a in by_image.get(&img.id).into_iter().flatten() {
            let Some(cat) = names.get(&a.category_id) else {
                return Err(Error::Manifest(format!(
                    "annotation {} uses unknown category {}",
                    a.id, a.category_id
                )));
            };
            let mask = coco_mask(&a.segmentation, img.height, img.width)?;
            let rel = write_mask(out_dir, &format!("{id}_{}.png", a.id), &mask)?;
            objects.push(ObjectAnnotation {
                mask: rel,
                class: cat.name.clone(),
            });
        }
        entries.push(ManifestEntry {
            id,
            image,
            objects,
            saturation_mask: None,
        });
    }
    let manifest = SourceManifest {
        class_taxonomy,
        entries,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}

// -------------------------------------------------------------- ADE20K

/// Class index -> name and supercategory, supplied by the user.
#[derive(Debug, Clone, Deserialize)]
pub struct AdeClass {
    pub name: String,
    pub supercategory: String,
}

/// Splits an ADE20K `_seg.png` into `(class index, instance mask)` pairs.
/// The class is `R / 10 * 256 + G` and instances are the distinct non-zero
/// `B` values; each instance takes the most frequent class of its pixels.
pub fn ade_instances(seg: &Image) -> Result<Vec<(u32, Image)>> {
    if seg.channels() != 3 {
        return Err(Error::InvalidInput(
            "ADE20K segmentation must be RGB".into(),
        ));
    }
    let (h, w) = (seg.height(), seg.width());
    let level = |v: f32| (v * 255.0).round() as u32;
    let mut classes: BTreeMap<u32, BTreeMap<u32, usize>> = BTreeMap::new();
    for px in seg.data().chunks_exact(3) {
        let (r, g, b) = (level(px[0]), level(px[1]), level(px[2]));
        if b == 0 {
            continue;
        }
        let class = r / 10 * 256 + g;
        *classes.entry(b).or_default().entry(class).or_default() += 1;
    }
    let mut out = Vec::new();
    for (instance, counts) in classes {
        let (&class, _) = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .expect("non-empty");
        if class == 0 {
            continue;
        }
        let mask = Image::from_fn(h, w, 1, |y, x, _| {
            (level(seg.get(y, x, 2)) == instance) as u8 as f32
        });
        out.push((class, mask));
    }
    Ok(out)
}

fn find_seg_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut items: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    items.sort();
    for p in items {
        if p.is_dir() {
            find_seg_files(&p, out)?;
        } else if p.to_str().is_some_and(|s| s.ends_with("_seg.png")) {
            out.push(p);
        }
    }
    Ok(())
}

/// Converts every `<name>_seg.png` under `root` (image `<name>.jpg` or
/// `<name>.png` beside it). Instances of classes missing from `classes` are
/// skipped.
pub fn import_ade20k(
    root: &Path,
    classes: &BTreeMap<u32, AdeClass>,
    out_dir: &Path,
) -> Result<SourceManifest> {
    create_dirs(out_dir)?;
    let mut segs = Vec::new();
    find_seg_files(root, &mut segs)?;
    let class_taxonomy = classes
        .values()
        .map(|c| (c.name.clone(), c.supercategory.clone()))
        .collect();
    let mut entries = Vec::new();
    for seg_path in segs {
        let name = seg_path
            .to_str()
            .expect("utf-8 path")
            .trim_end_matches("_seg.png");
        let source = ["jpg", "jpeg", "png"]
            .iter()
            .map(|ext| PathBuf::from(format!("{name}.{ext}")))
            .find(|p| p.is_file())
            .ok_or_else(|| Error::MissingFiles(vec![PathBuf::from(format!("{name}.jpg"))]))?;
        let stem = Path::new(name)
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("image");
        let id = sanitize_id(stem);
        let image = ensure_png(&source, &id, out_dir)?;
        let mut objects = Vec::new();
        for (k, (class, mask)) in ade_instances(&read_png(&seg_path)?)?
            .into_iter()
            .enumerate()
        {
            let Some(c) = classes.get(&class) else {
                log::debug!("{id}: skipping unmapped class {class}");
                continue;
            };
            let rel = write_mask(out_dir, &format!("{id}_{k}.png"), &mask)?;
            objects.push(ObjectAnnotation {
                mask: rel,
                class: c.name.clone(),
            });
        }
        entries.push(ManifestEntry {
            id,
            image,
            objects,
            saturation_mask: None,
        });
    }
    let manifest = SourceManifest {
        class_taxonomy,
        entries,
    };
    write_manifest(out_dir, &manifest)?;
    Ok(manifest)
}
