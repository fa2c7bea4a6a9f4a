use std::collections::HashMap;
use std::path::{Path, PathBuf};

use volcore::{write_volume, Volume};

use crate::errors::{CliError, Result};

struct ConvertSpec {
    input: PathBuf,
    output: PathBuf,
    dims: [usize; 3],
    dtype: String,
    spacing: [f32; 3],
}

fn parse_spec(path: &Path) -> Result<ConvertSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read spec {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut keys: HashMap<String, String> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("spec line {}: expected key=value", idx + 1))
        })?;
        if keys.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("spec key {} given twice", k.trim())));
        }
    }
    let take = |key: &str| -> Result<String> {
        keys.get(key)
            .cloned()
            .ok_or_else(|| CliError::Usage(format!("spec is missing key '{key}'")))
    };
    for k in keys.keys() {
        if !["input", "output", "dims", "dtype", "spacing"].contains(&k.as_str()) {
            return Err(CliError::Usage(format!("unknown spec key '{k}'")));
        }
    }
    let dims_v: Vec<usize> = take("dims")?
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Usage("bad dims".into())))
        .collect::<Result<_>>()?;
    if dims_v.len() != 3 || dims_v.iter().any(|&d| d == 0) {
        return Err(CliError::Usage("dims needs three positive values".into()));
    }
    let spacing_v: Vec<f32> = take("spacing")?
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Usage("bad spacing".into())))
        .collect::<Result<_>>()?;
    if spacing_v.len() != 3 || spacing_v.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(CliError::Usage("spacing needs three positive values".into()));
    }
    let resolve = |raw: String| {
        let p = PathBuf::from(raw);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    Ok(ConvertSpec {
        input: resolve(take("input")?),
        output: resolve(take("output")?),
        dims: [dims_v[0], dims_v[1], dims_v[2]],
        dtype: take("dtype")?,
        spacing: [spacing_v[0], spacing_v[1], spacing_v[2]],
    })
}

/// Packages a raw little-endian voxel blob into the volume file format,
/// checking that the blob size matches the declared dims and dtype.
pub fn run(spec_path: &Path) -> Result<()> {
    let spec = parse_spec(spec_path)?;
    let blob = std::fs::read(&spec.input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", spec.input.display())))?;
    let voxels = spec.dims[0] * spec.dims[1] * spec.dims[2];
    let volume = match spec.dtype.as_str() {
        "f32" => {
            if blob.len() != voxels * 4 {
                return Err(CliError::Data(format!(
                    "declared {voxels} f32 voxels ({} bytes) but blob holds {} bytes",
                    voxels * 4,
                    blob.len()
                )));
            }
            let data: Vec<f32> = blob
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            Volume::f32(spec.dims, spec.spacing, data)?
        }
        "u8" => {
            if blob.len() != voxels {
                return Err(CliError::Data(format!(
                    "declared {voxels} u8 voxels but blob holds {} bytes",
                    blob.len()
                )));
            }
            Volume::u8(spec.dims, spec.spacing, blob)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown dtype '{other}' (known: f32, u8)"
            )));
        }
    };
    write_volume(&volume, &spec.output)?;
    println!(
        "wrote {} ({}x{}x{} {})",
        spec.output.display(),
        spec.dims[0],
        spec.dims[1],
        spec.dims[2],
        spec.dtype
    );
    Ok(())
}
