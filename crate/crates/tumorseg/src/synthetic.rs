use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volcore::{write_volume, Volume, MODALITIES};

use crate::errors::{CliError, Result};

/// Shape parameters for one generated scan: a three-shell spherical tumor.
struct TumorShape {
    center: [f64; 3],
    whole_r: f64,
    core_r: f64,
    enhancing_r: f64,
}

pub struct SyntheticSpec {
    pub train: usize,
    pub test: usize,
    pub dims: usize,
    pub radius_frac: f64,
    pub contrast: f64,
    pub noise: f64,
    pub seed: u64,
}

pub struct SyntheticSummary {
    pub train_manifest: PathBuf,
    pub test_manifest: PathBuf,
    pub truth_train: PathBuf,
    pub truth_test: PathBuf,
    pub scans: usize,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn draw_shape(rng: &mut ChaCha8Rng, dims: usize, radius_frac: f64) -> TumorShape {
    let d = dims as f64;
    let whole_r = (radius_frac * d * rng.gen_range(0.85..1.15)).max(2.0);
    let margin = whole_r + 1.0;
    let lo = margin.min(d / 2.0);
    let hi = (d - margin).max(d / 2.0);
    let mut center = [0.0; 3];
    for c in &mut center {
        *c = if lo < hi { rng.gen_range(lo..hi) } else { d / 2.0 };
    }
    TumorShape {
        center,
        whole_r,
        core_r: whole_r * 0.65,
        enhancing_r: whole_r * 0.35,
    }
}

fn label_of(dist: f64, shape: &TumorShape) -> u8 {
    if dist <= shape.enhancing_r {
        4
    } else if dist <= shape.core_r {
        1
    } else if dist <= shape.whole_r {
        2
    } else {
        0
    }
}

/// Clean per-modality intensity for a voxel with the given label. Each
/// modality highlights a different shell so all three regions are separable.
fn clean_intensity(modality: usize, label: u8, contrast: f64) -> f64 {
    let base = 0.2;
    let in_whole = label != 0;
    let in_core = label == 1 || label == 4;
    let in_enh = label == 4;
    match modality {
        0 => base + if in_whole { contrast } else { 0.0 },
        1 => base + 0.4 - if in_core { 0.5 * contrast } else { 0.0 },
        2 => base + if in_enh { contrast } else { 0.0 },
        3 => base + if in_whole { 0.5 * contrast } else { 0.0 },
        _ => base,
    }
}

fn generate_scan(
    rng: &mut ChaCha8Rng,
    spec: &SyntheticSpec,
) -> (Vec<Vec<f32>>, Vec<u8>) {
    let n = spec.dims;
    let shape = draw_shape(rng, n, spec.radius_frac);
    let mut labels = vec![0u8; n * n * n];
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let dist = ((x as f64 - shape.center[0]).powi(2)
                    + (y as f64 - shape.center[1]).powi(2)
                    + (z as f64 - shape.center[2]).powi(2))
                .sqrt();
                labels[x + n * (y + n * z)] = label_of(dist, &shape);
            }
        }
    }
    let mut modalities = Vec::with_capacity(4);
    for m in 0..4 {
        let mut data = vec![0.0f32; n * n * n];
        for (i, v) in data.iter_mut().enumerate() {
            let clean = clean_intensity(m, labels[i], spec.contrast);
            *v = (clean + spec.noise * gaussian(rng)).max(0.0) as f32;
        }
        modalities.push(data);
    }
    (modalities, labels)
}

fn write_scan(
    out_dir: &Path,
    scan_id: &str,
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(String, String)> {
    let (modalities, labels) = generate_scan(rng, spec);
    let dims = [spec.dims; 3];
    let spacing = [1.0f32; 3];
    let mut scan_line = scan_id.to_string();
    for (m, data) in modalities.into_iter().enumerate() {
        let name = format!("{scan_id}_{}.vvl", MODALITIES[m].to_string().to_lowercase());
        let vol = Volume::f32(dims, spacing, data)?;
        write_volume(&vol, &out_dir.join(&name))?;
        scan_line.push(' ');
        scan_line.push_str(&name);
    }
    let label_name = format!("{scan_id}_labels.vvl");
    let vol = Volume::u8(dims, spacing, labels)?;
    write_volume(&vol, &out_dir.join(&label_name))?;
    scan_line.push(' ');
    scan_line.push_str(&label_name);
    let truth_line = format!("{scan_id} {label_name}");
    Ok((scan_line, truth_line))
}

/// Generates the full dataset under `out_dir`: volumes, scan manifests with a
/// labels column, and two-column truth manifests for evaluation.
pub fn generate_dataset(out_dir: &Path, spec: &SyntheticSpec) -> Result<SyntheticSummary> {
    if spec.train == 0 && spec.test == 0 {
        return Err(CliError::Usage("need at least one scan to generate".into()));
    }
    if spec.dims < 8 {
        return Err(CliError::Usage("synthetic dims must be at least 8".into()));
    }
    if !(spec.radius_frac > 0.0 && spec.radius_frac < 0.5) {
        return Err(CliError::Usage("radius_frac must lie in (0, 0.5)".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut write_split = |prefix: &str, count: usize| -> Result<(PathBuf, PathBuf)> {
        let mut scan_lines = Vec::new();
        let mut truth_lines = Vec::new();
        for i in 0..count {
            let scan_id = format!("{prefix}_{i:02}");
            let (scan_line, truth_line) = write_scan(out_dir, &scan_id, spec, &mut rng)?;
            scan_lines.push(scan_line);
            truth_lines.push(truth_line);
        }
        let manifest = out_dir.join(format!("{prefix}_manifest.txt"));
        let truth = out_dir.join(format!("truth_{prefix}.txt"));
        let mut f = std::fs::File::create(&manifest)?;
        writeln!(f, "{}", scan_lines.join("\n"))?;
        let mut f = std::fs::File::create(&truth)?;
        writeln!(f, "{}", truth_lines.join("\n"))?;
        Ok((manifest, truth))
    };
    let (train_manifest, truth_train) = write_split("train", spec.train)?;
    let (test_manifest, truth_test) = write_split("test", spec.test)?;
    Ok(SyntheticSummary {
        train_manifest,
        test_manifest,
        truth_train,
        truth_test,
        scans: spec.train + spec.test,
    })
}
