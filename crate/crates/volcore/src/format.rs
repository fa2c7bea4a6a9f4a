//! The VVL1 volume file format.
//!
//! Little-endian layout: bytes 0-3 magic `VVL1`; byte 4 dtype code
//! (0 = float32, 1 = uint8); bytes 5-16 three u32 dims (nx, ny, nz);
//! bytes 17-28 three f32 spacings; bytes 29-32 reserved zero; then the
//! payload of `nx * ny * nz` values, x fastest, then y, then z.
//!
//! A plain-text sidecar `<file>.meta` with `key=value` lines may carry the
//! scan id and modality key.

use crate::error::{Result, VolError};
use crate::volume::{Volume, VoxelData};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"VVL1";
pub const HEADER_LEN: usize = 33;

pub fn write_volume(v: &Volume, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[v.data.dtype_code()])?;
    for d in v.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for s in v.spacing {
        w.write_all(&s.to_le_bytes())?;
    }
    w.write_all(&[0u8; 4])?;
    match &v.data {
        VoxelData::F32(vals) => {
            for x in vals {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        VoxelData::U8(vals) => w.write_all(vals)?,
    }
    w.flush()?;
    Ok(())
}

pub fn read_volume(path: &Path) -> Result<Volume> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    read_exact(&mut r, &mut header, "header")?;
    if &header[0..4] != MAGIC {
        return Err(VolError::BadMagic);
    }
    let dtype = header[4];
    let dim_at = |i: usize| {
        u32::from_le_bytes([header[5 + 4 * i], header[6 + 4 * i], header[7 + 4 * i], header[8 + 4 * i]])
            as usize
    };
    let dims = [dim_at(0), dim_at(1), dim_at(2)];
    let spc_at = |i: usize| {
        f32::from_le_bytes([
            header[17 + 4 * i],
            header[18 + 4 * i],
            header[19 + 4 * i],
            header[20 + 4 * i],
        ])
    };
    let spacing = [spc_at(0), spc_at(1), spc_at(2)];
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|p| p.checked_mul(dims[2]))
        .ok_or_else(|| VolError::InvalidVolume(format!("dims {:?} overflow", dims)))?;

    let data = match dtype {
        0 => {
            let mut bytes = vec![0u8; count * 4];
            read_exact(&mut r, &mut bytes, "float32 payload")?;
            VoxelData::F32(
                bytes
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                    .collect(),
            )
        }
        1 => {
            let mut bytes = vec![0u8; count];
            read_exact(&mut r, &mut bytes, "uint8 payload")?;
            VoxelData::U8(bytes)
        }
        other => return Err(VolError::UnsupportedDtype(other)),
    };
    Volume::new(dims, spacing, data)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], context: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            VolError::TruncatedData {
                context: context.to_string(),
            }
        } else {
            VolError::IoFailure(e)
        }
    })
}

/// Sidecar metadata for one volume file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VolumeMeta {
    pub scan_id: Option<String>,
    pub modality: Option<String>,
}

pub fn meta_path(volume_path: &Path) -> PathBuf {
    let mut os = volume_path.as_os_str().to_os_string();
    os.push(".meta");
    PathBuf::from(os)
}

pub fn write_meta(meta: &VolumeMeta, volume_path: &Path) -> Result<()> {
    let mut out = String::new();
    if let Some(id) = &meta.scan_id {
        out.push_str(&format!("scan_id={}\n", id));
    }
    if let Some(m) = &meta.modality {
        out.push_str(&format!("modality={}\n", m));
    }
    std::fs::write(meta_path(volume_path), out)?;
    Ok(())
}

/// Reads the sidecar if present; a missing sidecar is an empty meta.
pub fn read_meta(volume_path: &Path) -> Result<VolumeMeta> {
    let p = meta_path(volume_path);
    if !p.exists() {
        return Ok(VolumeMeta::default());
    }
    let text = std::fs::read_to_string(p)?;
    let mut meta = VolumeMeta::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some(("scan_id", v)) => meta.scan_id = Some(v.to_string()),
            Some(("modality", v)) => meta.modality = Some(v.to_string()),
            _ => {
                return Err(VolError::InvalidVolume(format!(
                    "bad sidecar line {:?}",
                    line
                )))
            }
        }
    }
    Ok(meta)
}
