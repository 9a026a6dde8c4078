use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use vcrkit::evalkit::{degrade, resize_mask_nearest, DegradeOp};
use vcrkit::manifest::{Manifest, ManifestEntry};
use vcrkit::{BoundingBox, RasterImage};
use walkdir::WalkDir;

use super::{create, required, DegradeArgs};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// 64-bit FNV-1a, used to derive a per-file noise seed from its path.
fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Relative path with `/` separators, independent of the host platform.
fn portable(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn parse_op(op: &str, value: &str, seed: Option<u64>) -> Result<DegradeOp> {
    let bad = || anyhow!("invalid {op} parameter `{value}`");
    let op = match op {
        "jpeg" => DegradeOp::Jpeg {
            quality: value.parse().map_err(|_| bad())?,
        },
        "noise" => DegradeOp::GaussianNoise {
            sigma: value.parse().map_err(|_| bad())?,
            seed: seed.ok_or_else(|| anyhow!("noise degradation requires --seed"))?,
        },
        "blur" => DegradeOp::GaussianBlur {
            kernel: value.parse().map_err(|_| bad())?,
        },
        "resize" => DegradeOp::Resize {
            rate: value.parse().map_err(|_| bad())?,
        },
        other => bail!("unknown degradation `{other}` (expected jpeg, noise, blur or resize)"),
    };
    op.validate()?;
    Ok(op)
}

fn with_file_seed(op: DegradeOp, rel: &str) -> DegradeOp {
    match op {
        DegradeOp::GaussianNoise { sigma, seed } => DegradeOp::GaussianNoise {
            sigma,
            seed: seed ^ fnv1a64(rel.as_bytes()),
        },
        other => other,
    }
}

fn list_images(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.with_context(|| format!("walking {}", root.display()))?;
        let is_image = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if entry.file_type().is_file() && is_image {
            out.push(
                entry
                    .path()
                    .strip_prefix(root)
                    .expect("walk stays under root")
                    .to_path_buf(),
            );
        }
    }
    Ok(out)
}

/// Scales a box by the resize ratios, rounding outward.
fn scale_box(b: &BoundingBox, from: (u32, u32), to: (u32, u32)) -> Result<BoundingBox> {
    let sx = |v: u32, up: bool| {
        let num = u64::from(v) * u64::from(to.0);
        let den = u64::from(from.0);
        (if up { num.div_ceil(den) } else { num / den }) as i64
    };
    let sy = |v: u32, up: bool| {
        let num = u64::from(v) * u64::from(to.1);
        let den = u64::from(from.1);
        (if up { num.div_ceil(den) } else { num / den }) as i64
    };
    let coords = [sx(b.x1(), false), sy(b.y1(), false), sx(b.x2(), true), sy(b.y2(), true)];
    Ok(vcrkit::clamp_box(coords, to.0, to.1)?)
}

type Dims = (u32, u32);

struct Sweep {
    op: DegradeOp,
    dir: PathBuf,
    /// Relative image path -> (input dimensions, output dimensions).
    sizes: HashMap<PathBuf, (Dims, Dims)>,
}

pub fn run(a: DegradeArgs) -> Result<()> {
    let op_name = required(&a.op, "op")?;
    let params = required(&a.param, "param")?;
    let input = required(&a.input, "in")?;
    let out_root = required(&a.out, "out")?;
    let input_root = input
        .canonicalize()
        .with_context(|| format!("input directory {}", input.display()))?;

    let mut sweeps = Vec::new();
    for value in params.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        let op = parse_op(&op_name, value, a.seed)?;
        sweeps.push(Sweep {
            op,
            dir: out_root.join(format!("{op_name}_{value}")),
            sizes: HashMap::new(),
        });
    }
    if sweeps.is_empty() {
        bail!("--param lists no values");
    }

    let files = list_images(&input_root)?;
    let (mut processed, mut failed) = (0usize, 0usize);
    for rel in &files {
        let src = input_root.join(rel);
        let img = match RasterImage::load(&src) {
            Ok(img) => img,
            Err(e) => {
                if !a.continue_on_error {
                    return Err(e.into());
                }
                eprintln!("error: {e}");
                failed += 1;
                continue;
            }
        };
        let key = portable(rel);
        for sweep in &mut sweeps {
            let out = degrade(&img, &with_file_seed(sweep.op, &key))?;
            let dst = sweep.dir.join(rel).with_extension("png");
            if let Some(parent) = dst.parent() {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            out.save(&dst)?;
            sweep.sizes.insert(rel.clone(), (img.dimensions(), out.dimensions()));
        }
        processed += 1;
    }

    if let Some(manifest_path) = &a.manifest {
        let manifest = Manifest::load(manifest_path)?;
        for sweep in &sweeps {
            rewrite_manifest(&manifest, &input_root, sweep)?;
        }
    }

    let values: Vec<&str> = params.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    println!(
        "{}",
        json!({"op": op_name, "values": values, "processed": processed, "failed": failed})
    );
    if failed > 0 {
        bail!("{failed} file(s) could not be degraded");
    }
    Ok(())
}

/// Writes `<sweep dir>/manifest.jsonl` pointing at the degraded images.
/// Masks and boxes are carried over, resampled for resize sweeps.
fn rewrite_manifest(manifest: &Manifest, input_root: &Path, sweep: &Sweep) -> Result<()> {
    let mut w = create(&sweep.dir.join("manifest.jsonl"))?;
    for e in manifest.entries() {
        let src = manifest
            .resolve(&e.image)
            .canonicalize()
            .with_context(|| format!("image of sample {}", e.sample_id))?;
        let rel = src
            .strip_prefix(input_root)
            .map_err(|_| anyhow!("image of sample {} is outside the input tree", e.sample_id))?
            .to_path_buf();
        let Some(&(from, to)) = sweep.sizes.get(&rel) else {
            bail!("image of sample {} was not degraded", e.sample_id);
        };
        let mut entry = ManifestEntry {
            image: rel.with_extension("png"),
            ..e.clone()
        };
        if let Some(mask) = &e.mask {
            let mask_src = manifest.resolve(mask);
            entry.mask = Some(if from == to {
                mask_src
                    .canonicalize()
                    .with_context(|| format!("mask of sample {}", e.sample_id))?
            } else {
                let resized = resize_mask_nearest(&vcrkit::BinaryMask::load(&mask_src)?, to.0, to.1);
                let mask_rel = Path::new("_masks").join(rel.with_extension("png"));
                let dst = sweep.dir.join(&mask_rel);
                if let Some(parent) = dst.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                resized.save_png(&dst)?;
                mask_rel
            });
        }
        if let Some(boxes) = &e.boxes {
            entry.boxes = Some(boxes.iter().map(|b| scale_box(b, from, to)).collect::<Result<_>>()?);
        }
        writeln!(w, "{}", serde_json::to_string(&entry)?)?;
    }
    w.flush()?;
    Ok(())
}
