//! Small on-disk datasets for pipeline tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use segblur::io::{write_png, BitDepth};
use segblur::Image;

pub fn texture(seed: usize, h: usize, w: usize) -> Image {
    let s = seed as f32;
    Image::from_fn(h, w, 3, |y, x, c| {
        let v = (0.09 * x as f32 + 0.05 * y as f32 + s + c as f32).sin() * 0.3 + 0.45;
        v + if (x / 6 + y / 6) % 2 == 0 { 0.1 } else { 0.0 }
    })
}

pub fn rect(h: usize, w: usize, y0: usize, x0: usize, rh: usize, rw: usize) -> Image {
    Image::from_fn(h, w, 1, |y, x, _| {
        (y >= y0 && y < y0 + rh && x >= x0 && x < x0 + rw) as u8 as f32
    })
}

/// `objects` lists `(class, mask)` per entry. Returns the manifest path.
pub fn write_dataset(dir: &Path, h: usize, w: usize, entries: &[Vec<(&str, Image)>]) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let mut json = Vec::new();
    for (i, objects) in entries.iter().enumerate() {
        let id = format!("e{i:02}");
        write_png(
            &dir.join(format!("{id}.png")),
            &texture(i, h, w),
            BitDepth::Eight,
        )
        .unwrap();
        let mut objs = Vec::new();
        for (k, (class, mask)) in objects.iter().enumerate() {
            let name = format!("{id}_{k}.png");
            write_png(&dir.join(&name), mask, BitDepth::Eight).unwrap();
            objs.push(serde_json::json!({"mask": name, "class": class}));
        }
        json.push(serde_json::json!({"id": id, "image": format!("{id}.png"), "objects": objs}));
    }
    let manifest = serde_json::json!({
        "class_taxonomy": {
            "person": "person", "car": "vehicle", "dog": "animal",
            "tree": "plant", "lamp": "light"
        },
        "entries": json,
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
    path
}

/// Every file below `root` with its contents, sorted by path.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
