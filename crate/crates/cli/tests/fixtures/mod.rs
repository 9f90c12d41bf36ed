//! Synthetic source images, masks and manifests for end-to-end runs.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use segblur::io::{write_png, BitDepth};
use segblur::Image;

/// Smooth colour texture with edges, distinct per `seed`, kept below 0.9.
pub fn texture(seed: usize, h: usize, w: usize) -> Image {
    let s = seed as f32;
    Image::from_fn(h, w, 3, |y, x, c| {
        let (xf, yf, cf) = (x as f32, y as f32, c as f32);
        let wave = (0.11 * xf + 0.07 * yf * (1.0 + 0.1 * cf) + s).sin()
            * (0.05 * yf - 0.13 * xf + 0.7 * s + cf).cos();
        let checker = if (x / 8 + y / 8 + seed).is_multiple_of(2) {
            0.15
        } else {
            0.0
        };
        (0.4 + 0.3 * wave + checker).clamp(0.0, 0.88)
    })
}

pub fn rect_mask(h: usize, w: usize, y0: usize, x0: usize, rh: usize, rw: usize) -> Image {
    Image::from_fn(h, w, 1, |y, x, _| {
        (y >= y0 && y < y0 + rh && x >= x0 && x < x0 + rw) as u8 as f32
    })
}

pub struct Fixture {
    pub dir: PathBuf,
    pub manifest: PathBuf,
}

/// Writes `n` images with up to three objects each and a manifest. Every
/// fourth image also carries a light source so both modes find work.
pub fn write_fixture(dir: &Path, n: usize, h: usize, w: usize) -> Fixture {
    std::fs::create_dir_all(dir).unwrap();
    let mut entries = Vec::new();
    for i in 0..n {
        let id = format!("img{i:03}");
        write_png(
            &dir.join(format!("{id}.png")),
            &texture(i, h, w),
            BitDepth::Eight,
        )
        .unwrap();
        let mut objects = Vec::new();
        let shapes = [
            ("person", h / 8, w / 8, h / 3, w / 4),
            ("car", h / 2, w / 2, h / 4, w / 3),
            ("tree", h / 10, w / 2 + 2, h / 3, w / 5),
        ];
        for (k, &(class, y0, x0, rh, rw)) in shapes.iter().enumerate().take(1 + i % 3) {
            let name = format!("{id}_m{k}.png");
            write_png(
                &dir.join(&name),
                &rect_mask(h, w, y0, x0, rh, rw),
                BitDepth::Eight,
            )
            .unwrap();
            objects.push(serde_json::json!({"mask": name, "class": class}));
        }
        if i % 4 == 3 {
            let name = format!("{id}_lamp.png");
            write_png(
                &dir.join(&name),
                &rect_mask(h, w, h - 12, 4, 6, 6),
                BitDepth::Eight,
            )
            .unwrap();
            objects.retain(|o| o["class"] != "person");
            objects.push(serde_json::json!({"mask": name, "class": "lamp"}));
        }
        entries
            .push(serde_json::json!({"id": id, "image": format!("{id}.png"), "objects": objects}));
    }
    let manifest = serde_json::json!({
        "class_taxonomy": {
            "person": "person", "car": "vehicle", "dog": "animal",
            "tree": "plant", "lamp": "light"
        },
        "entries": entries,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    Fixture {
        dir: dir.to_path_buf(),
        manifest: path,
    }
}

/// `(relative path, sha256)` of every file below `root`, sorted.
pub fn tree_hashes(root: &Path) -> Vec<(PathBuf, String)> {
    use sha2::{Digest, Sha256};
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, String)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    hex::encode(Sha256::digest(&bytes)),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
