use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use segblur::io::{encode_kernel_png, read_png, write_bytes};
use segblur::kernel::{ExposureRange, KernelGeneratorSpec, KernelModel};
use segblur::metrics::compare;
use segblur::pipeline::import::{import_ade20k, import_coco, AdeClass};
use segblur::pipeline::{
    generate_dataset, load_manifest, verify_dataset, GenerationConfig, PairStatus,
};

#[derive(Parser)]
#[command(
    name = "segblur",
    version,
    about = "Synthesize sharp/blurred image pairs with segmentation-based motion blur"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample blur kernels and write them as binary files and PNG previews.
    GenKernels {
        /// tremor, spline6 or linear3d.
        #[arg(long, default_value = "tremor")]
        model: KernelModel,
        #[arg(long, default_value_t = 65)]
        size: usize,
        /// Exposure in seconds, either fixed (`0.05`) or a range (`0.01:0.25`).
        #[arg(long, default_value = "0.01:0.25")]
        exposure: String,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Skip the PNG previews.
        #[arg(long)]
        no_png: bool,
    },
    /// Generate a dataset from a manifest and a TOML configuration.
    GenDataset {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Regenerate every pair of a dataset and compare it byte for byte.
    Verify {
        #[arg(long)]
        dir: PathBuf,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// PSNR and SSIM between two images.
    Metrics {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert a COCO instances file into a manifest.
    ImportCoco {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an ADE20K tree into a manifest.
    ImportAde20k {
        #[arg(long)]
        root: PathBuf,
        /// JSON object mapping class index to `{"name", "supercategory"}`.
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_exposure(s: &str) -> Result<ExposureRange> {
    let range = match s.split_once(':') {
        Some((a, b)) => ExposureRange {
            min: a.trim().parse().context("exposure minimum")?,
            max: b.trim().parse().context("exposure maximum")?,
        },
        None => ExposureRange::fixed(s.trim().parse().context("exposure")?),
    };
    Ok(range)
}

fn gen_kernels(
    model: KernelModel,
    size: usize,
    exposure: &str,
    count: usize,
    seed: u64,
    out_dir: &Path,
    png: bool,
) -> Result<bool> {
    let spec = KernelGeneratorSpec {
        exposure: parse_exposure(exposure)?,
        seed,
        ..KernelGeneratorSpec::new(model, size)
    };
    spec.validate()?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let kernels = spec.generate_batch(count)?;
    let width = count.saturating_sub(1).to_string().len().max(4);
    for (i, k) in kernels.iter().enumerate() {
        let stem = format!("kernel_{i:0width$}");
        write_bytes(&out_dir.join(format!("{stem}.bin")), &k.to_bytes())?;
        if png {
            write_bytes(&out_dir.join(format!("{stem}.png")), &encode_kernel_png(k)?)?;
        }
    }
    println!(
        "wrote {count} {size}x{size} kernels to {}",
        out_dir.display()
    );
    Ok(true)
}

fn gen_dataset(
    manifest: &Path,
    config: &Path,
    seed: Option<u64>,
    out: &Path,
    jobs: Option<usize>,
) -> Result<bool> {
    let mut cfg = GenerationConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let manifest = load_manifest(manifest)?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let summary = generate_dataset(&manifest, &cfg, out, jobs)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(summary.success)
}

fn verify(dir: &Path, report: Option<&Path>) -> Result<bool> {
    let r = verify_dataset(dir)?;
    for v in r.failures() {
        let detail = match &v.status {
            PairStatus::Mismatch { artifacts } => format!("mismatch: {artifacts:?}"),
            PairStatus::MissingArtifact { artifacts } => format!("missing artifact: {artifacts:?}"),
            PairStatus::Invalid { message } => format!("invalid: {message}"),
            PairStatus::Error { message } => format!("error: {message}"),
            PairStatus::Pass => unreachable!(),
        };
        println!("FAIL {} {detail}", v.record.display());
    }
    println!("{} passed, {} failed", r.passed, r.failed);
    if let Some(path) = report {
        write_bytes(path, serde_json::to_string_pretty(&r)?.as_bytes())?;
    }
    Ok(r.all_passed())
}

fn metrics(a: &Path, b: &Path, report: Option<&Path>) -> Result<bool> {
    let r = compare(&read_png(a)?, &read_png(b)?)?;
    let json = serde_json::to_string_pretty(&r)?;
    println!("{json}");
    if let Some(path) = report {
        write_bytes(path, json.as_bytes())?;
    }
    Ok(true)
}

fn import_ade(root: &Path, classes: &Path, out: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(classes)
        .with_context(|| format!("reading {}", classes.display()))?;
    let raw: BTreeMap<String, AdeClass> = serde_json::from_str(&text)?;
    let mut map = BTreeMap::new();
    for (k, v) in raw {
        let Ok(index) = k.parse::<u32>() else {
            bail!("class key `{k}` is not an integer");
        };
        map.insert(index, v);
    }
    let m = import_ade20k(root, &map, out)?;
    println!(
        "imported {} entries into {}",
        m.entries.len(),
        out.join("manifest.json").display()
    );
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenKernels {
            model,
            size,
            exposure,
            count,
            seed,
            out_dir,
            no_png,
        } => gen_kernels(model, size, &exposure, count, seed, &out_dir, !no_png),
        Command::GenDataset {
            manifest,
            config,
            seed,
            out,
            jobs,
        } => gen_dataset(&manifest, &config, seed, &out, jobs),
        Command::Verify { dir, report } => verify(&dir, report.as_deref()),
        Command::Metrics { a, b, report } => metrics(&a, &b, report.as_deref()),
        Command::ImportCoco {
            annotations,
            images,
            out,
        } => {
            let m = import_coco(&annotations, &images, &out)?;
            println!(
                "imported {} entries into {}",
                m.entries.len(),
                out.join("manifest.json").display()
            );
            Ok(true)
        }
        Command::ImportAde20k { root, classes, out } => import_ade(&root, &classes, &out),
    }
}

/// 0 on success, 1 when a run or verification found failures, 2 on errors.
fn exit_status(outcome: &Result<bool>) -> u8 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(_) => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let outcome = run(Cli::parse());
    if let Err(e) = &outcome {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(exit_status(&outcome))
}

#[cfg(test)]
#[path = "../tests/fixtures/mod.rs"]
mod fixtures;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{texture, write_fixture};
    use segblur::io::{read_bytes, write_png, BitDepth};
    use segblur::kernel::BlurKernel;

    fn invoke(args: &[&str], paths: &[(&str, &Path)]) -> Result<bool> {
        let mut argv: Vec<std::ffi::OsString> = vec!["segblur".into()];
        argv.extend(args.iter().map(Into::into));
        for (flag, p) in paths {
            argv.push(flag.into());
            argv.push(p.into());
        }
        run(Cli::try_parse_from(argv)?)
    }

    fn json(path: &Path) -> serde_json::Value {
        serde_json::from_slice(&read_bytes(path).unwrap()).unwrap()
    }

    #[test]
    fn gen_kernels_writes_valid_kernels_and_previews() {
        let tmp = tempfile::tempdir().unwrap();
        let args = [
            "gen-kernels",
            "--model",
            "spline6",
            "--size",
            "33",
            "--count",
            "3",
        ];
        assert!(invoke(&args, &[("--out-dir", tmp.path())]).unwrap());
        for i in 0..3 {
            let bytes = read_bytes(&tmp.path().join(format!("kernel_{i:04}.bin"))).unwrap();
            let k = BlurKernel::from_bytes(&bytes).unwrap();
            assert_eq!(k.size(), 33);
            k.validate().unwrap();
            let preview = read_png(&tmp.path().join(format!("kernel_{i:04}.png"))).unwrap();
            assert_eq!(preview.dims(), (33, 33, 1));
        }
    }

    #[test]
    fn invalid_arguments_map_to_status_2() {
        let tmp = tempfile::tempdir().unwrap();
        let out = [("--out-dir", tmp.path())];
        assert_eq!(
            exit_status(&invoke(&["gen-kernels", "--size", "64"], &out)),
            2
        );
        assert_eq!(
            exit_status(&invoke(&["gen-kernels", "--exposure", "0.3:0.1"], &out)),
            2
        );
        let missing = tmp.path().join("nothing");
        assert_eq!(exit_status(&invoke(&["verify"], &[("--dir", &missing)])), 2);
        assert_eq!(exit_status(&Ok(false)), 1);
        assert_eq!(exit_status(&Ok(true)), 0);
    }

    #[test]
    fn metrics_writes_a_json_report() {
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a.png"), tmp.path().join("b.png"));
        let report = tmp.path().join("r.json");
        write_png(&a, &texture(0, 40, 40), BitDepth::Eight).unwrap();
        write_png(&b, &texture(0, 40, 40).map(|v| v * 0.9), BitDepth::Eight).unwrap();
        assert!(invoke(
            &["metrics"],
            &[("--a", &a), ("--b", &b), ("--report", &report)]
        )
        .unwrap());
        let r = json(&report);
        assert!(r["psnr"].as_f64().unwrap() > 10.0);
        assert!(r["ssim"].as_f64().unwrap() < 1.0);
        assert_eq!(r["identical"], false);

        assert!(invoke(
            &["metrics"],
            &[("--a", &a), ("--b", &a), ("--report", &report)]
        )
        .unwrap());
        let r = json(&report);
        assert_eq!(r["identical"], true);
        assert!(r["psnr"].is_null());
    }

    #[test]
    fn seed_flag_overrides_the_config() {
        let tmp = tempfile::tempdir().unwrap();
        let fx = write_fixture(&tmp.path().join("src"), 2, 72, 72);
        let config = tmp.path().join("c.toml");
        std::fs::write(
            &config,
            "seed = 1\nkernel_sizes = [{ size = 17, weight = 1.0 }]\n",
        )
        .unwrap();
        let seed_of = |name: &str, seed: &[&str]| {
            let out = tmp.path().join(name);
            let mut args = vec!["gen-dataset", "--jobs", "1"];
            args.extend(seed);
            let paths = [
                ("--manifest", fx.manifest.as_path()),
                ("--config", &config),
                ("--out", &out),
            ];
            assert!(invoke(&args, &paths).unwrap());
            json(&out.join("summary.json"))["seed"].as_u64().unwrap()
        };
        assert_eq!(seed_of("a", &[]), 1);
        assert_eq!(seed_of("b", &["--seed", "9"]), 9);
    }

    #[test]
    fn import_coco_builds_a_usable_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let images = tmp.path().join("images");
        std::fs::create_dir_all(&images).unwrap();
        write_png(
            &images.join("000001.png"),
            &texture(3, 48, 64),
            BitDepth::Eight,
        )
        .unwrap();
        let coco = serde_json::json!({
            "images": [{"id": 1, "file_name": "000001.png", "width": 64, "height": 48}],
            "categories": [
                {"id": 1, "name": "person", "supercategory": "person"},
                {"id": 3, "name": "car", "supercategory": "vehicle"}
            ],
            "annotations": [
                {"id": 10, "image_id": 1, "category_id": 3, "iscrowd": 0,
                 "segmentation": [[4.0, 4.0, 40.0, 4.0, 40.0, 30.0, 4.0, 30.0]]},
                {"id": 11, "image_id": 1, "category_id": 1, "iscrowd": 1,
                 "segmentation": {"counts": [100, 20, 3000], "size": [48, 64]}}
            ]
        });
        let ann = tmp.path().join("instances.json");
        std::fs::write(&ann, coco.to_string()).unwrap();
        let out = tmp.path().join("imported");
        let paths = [
            ("--annotations", ann.as_path()),
            ("--images", &images),
            ("--out", &out),
        ];
        assert!(invoke(&["import-coco"], &paths).unwrap());
        let m = load_manifest(&out.join("manifest.json")).unwrap();
        assert_eq!(m.entries.len(), 1);
        // The crowd annotation is skipped.
        assert_eq!(m.entries[0].objects.len(), 1);
        let mask = read_png(&m.entries[0].objects[0].mask).unwrap();
        let area = mask.data().iter().filter(|&&v| v > 0.0).count();
        assert_eq!(area, 36 * 26);
    }
}
