//! Parameter checkpoints.
//!
//! Layout: the magic `CKP1`, a little-endian u32 byte length, a UTF-8 text
//! manifest with one `name dim0xdim1x... offset` line per parameter (offset
//! counted in f32 elements into the payload), then every value as one
//! little-endian f32 blob in manifest order.

use crate::error::{Result, TensorError};
use crate::tensor::Tensor;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"CKP1";

pub fn save_checkpoint(path: &Path, params: &[(String, &Tensor<f32>)]) -> Result<()> {
    let mut manifest = String::new();
    let mut offset = 0usize;
    for (name, tensor) in params {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
            return Err(TensorError::ManifestInvalid(format!(
                "parameter name {:?} must be nonempty without whitespace",
                name
            )));
        }
        let dims: Vec<String> = tensor.shape().iter().map(|d| d.to_string()).collect();
        manifest.push_str(&format!("{} {} {}\n", name, dims.join("x"), offset));
        offset += tensor.len();
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(manifest.len() as u32).to_le_bytes())?;
    w.write_all(manifest.as_bytes())?;
    for (_, tensor) in params {
        for &v in tensor.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Vec<(String, Tensor<f32>)>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(TensorError::BadMagic);
    }
    let mut len4 = [0u8; 4];
    read_exact(&mut r, &mut len4, "manifest length")?;
    let mlen = u32::from_le_bytes(len4) as usize;
    let mut mbytes = vec![0u8; mlen];
    read_exact(&mut r, &mut mbytes, "manifest")?;
    let manifest = String::from_utf8(mbytes)
        .map_err(|_| TensorError::ManifestInvalid("manifest is not UTF-8".into()))?;

    let mut entries: Vec<(String, Vec<usize>, usize)> = Vec::new();
    let mut expect_offset = 0usize;
    for (lineno, line) in manifest.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(TensorError::ManifestInvalid(format!(
                "line {}: want `name dims offset`, got {:?}",
                lineno + 1,
                line
            )));
        }
        let shape: Vec<usize> = parts[1]
            .split('x')
            .map(|d| {
                d.parse::<usize>().map_err(|_| {
                    TensorError::ManifestInvalid(format!(
                        "line {}: bad extent {:?}",
                        lineno + 1,
                        d
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let offset: usize = parts[2].parse().map_err(|_| {
            TensorError::ManifestInvalid(format!("line {}: bad offset {:?}", lineno + 1, parts[2]))
        })?;
        if offset != expect_offset {
            return Err(TensorError::ManifestInvalid(format!(
                "line {}: offset {} but payload position is {}",
                lineno + 1,
                offset,
                expect_offset
            )));
        }
        if entries.iter().any(|(n, _, _)| n == parts[0]) {
            return Err(TensorError::ParamMismatch {
                name: parts[0].to_string(),
                reason: "duplicate parameter name".into(),
            });
        }
        expect_offset += shape.iter().product::<usize>();
        entries.push((parts[0].to_string(), shape, offset));
    }

    let mut payload = vec![0u8; expect_offset * 4];
    read_exact(&mut r, &mut payload, "payload")?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(TensorError::ManifestInvalid(
            "payload longer than manifest declares".into(),
        ));
    }

    let mut out = Vec::with_capacity(entries.len());
    for (name, shape, offset) in entries {
        let len: usize = shape.iter().product();
        let data: Vec<f32> = payload[offset * 4..(offset + len) * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        out.push((name, Tensor::from_vec(&shape, data)?));
    }
    Ok(out)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], context: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            TensorError::Truncated {
                context: context.to_string(),
            }
        } else {
            TensorError::Io(e)
        }
    })
}
