//! Volumetric grids and the four-modality scan bundle.
//!
//! Voxel data is row-contiguous with x fastest-varying, then y, then z:
//! `index(x, y, z) = x + nx * (y + ny * z)`.

use crate::error::{Result, VolError};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub enum VoxelData {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

impl VoxelData {
    pub fn len(&self) -> usize {
        match self {
            VoxelData::F32(v) => v.len(),
            VoxelData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype_code(&self) -> u8 {
        match self {
            VoxelData::F32(_) => 0,
            VoxelData::U8(_) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    pub dims: [usize; 3],
    pub spacing: [f32; 3],
    pub data: VoxelData,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f32; 3], data: VoxelData) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(VolError::InvalidVolume(format!(
                "dims must all be >= 1, got {:?}",
                dims
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(VolError::InvalidVolume(format!(
                "spacing must be positive and finite, got {:?}",
                spacing
            )));
        }
        let expect = dims[0] * dims[1] * dims[2];
        if data.len() != expect {
            return Err(VolError::InvalidVolume(format!(
                "dims {:?} want {} voxels, data holds {}",
                dims,
                expect,
                data.len()
            )));
        }
        Ok(Volume {
            dims,
            spacing,
            data,
        })
    }

    pub fn f32(dims: [usize; 3], spacing: [f32; 3], data: Vec<f32>) -> Result<Self> {
        Volume::new(dims, spacing, VoxelData::F32(data))
    }

    pub fn u8(dims: [usize; 3], spacing: [f32; 3], data: Vec<u8>) -> Result<Self> {
        Volume::new(dims, spacing, VoxelData::U8(data))
    }

    pub fn zeros_u8(dims: [usize; 3], spacing: [f32; 3]) -> Self {
        Volume {
            dims,
            spacing,
            data: VoxelData::U8(vec![0u8; dims[0] * dims[1] * dims[2]]),
        }
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Value at a voxel as f64, regardless of stored dtype.
    #[inline]
    pub fn value_at(&self, x: usize, y: usize, z: usize) -> f64 {
        let i = self.index(x, y, z);
        match &self.data {
            VoxelData::F32(v) => v[i] as f64,
            VoxelData::U8(v) => v[i] as f64,
        }
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            VoxelData::F32(v) => Some(v),
            VoxelData::U8(_) => None,
        }
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.data {
            VoxelData::U8(v) => Some(v),
            VoxelData::F32(_) => None,
        }
    }

    pub fn same_grid(&self, other: &Volume) -> bool {
        self.dims == other.dims && self.spacing == other.spacing
    }

    /// One axial plane (fixed z) as f32 values, x fastest then y.
    pub fn axial_slice(&self, z: usize) -> Result<Vec<f32>> {
        let [nx, ny, nz] = self.dims;
        if z >= nz {
            return Err(VolError::InvalidVolume(format!(
                "axial slice {} out of {} planes",
                z, nz
            )));
        }
        let mut out = Vec::with_capacity(nx * ny);
        for y in 0..ny {
            for x in 0..nx {
                out.push(self.value_at(x, y, z) as f32);
            }
        }
        Ok(out)
    }
}

/// The four BRATS input channels, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Flair,
    T1,
    T1c,
    T2,
}

pub const MODALITIES: [Modality; 4] = [Modality::Flair, Modality::T1, Modality::T1c, Modality::T2];

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Flair => "FLAIR",
            Modality::T1 => "T1",
            Modality::T1c => "T1c",
            Modality::T2 => "T2",
        })
    }
}

impl FromStr for Modality {
    type Err = VolError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FLAIR" => Ok(Modality::Flair),
            "T1" => Ok(Modality::T1),
            "T1c" => Ok(Modality::T1c),
            "T2" => Ok(Modality::T2),
            other => Err(VolError::InvalidVolume(format!(
                "unknown modality {:?} (expected FLAIR, T1, T1c, T2)",
                other
            ))),
        }
    }
}

/// One subject: four co-registered modalities plus optional expert labels.
#[derive(Clone, Debug)]
pub struct MultiModalScan {
    pub scan_id: String,
    /// Indexed by the order of [`MODALITIES`].
    pub modalities: [Volume; 4],
    pub labels: Option<Volume>,
}

impl MultiModalScan {
    pub fn new(
        scan_id: String,
        modalities: [Volume; 4],
        labels: Option<Volume>,
    ) -> Result<Self> {
        let first = &modalities[0];
        for m in &modalities[1..] {
            if !first.same_grid(m) {
                return Err(VolError::InvalidVolume(format!(
                    "scan {}: modalities disagree on grid: {:?}/{:?} vs {:?}/{:?}",
                    scan_id, first.dims, first.spacing, m.dims, m.spacing
                )));
            }
        }
        if let Some(l) = &labels {
            if !first.same_grid(l) {
                return Err(VolError::InvalidVolume(format!(
                    "scan {}: labels grid {:?} differs from modalities {:?}",
                    scan_id, l.dims, first.dims
                )));
            }
            let lv = l.as_u8().ok_or_else(|| {
                VolError::InvalidVolume(format!("scan {}: labels must be uint8", scan_id))
            })?;
            for (i, &v) in lv.iter().enumerate() {
                if !matches!(v, 0 | 1 | 2 | 4) {
                    return Err(VolError::IllegalLabel { value: v, index: i });
                }
            }
        }
        Ok(MultiModalScan {
            scan_id,
            modalities,
            labels,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.modalities[0].dims
    }

    pub fn spacing(&self) -> [f32; 3] {
        self.modalities[0].spacing
    }

    pub fn modality(&self, m: Modality) -> &Volume {
        let idx = MODALITIES.iter().position(|&k| k == m).unwrap();
        &self.modalities[idx]
    }
}

/// The three nested evaluation regions as binary masks.
#[derive(Clone, Debug)]
pub struct RegionMasks {
    pub wt: Volume,
    pub tc: Volume,
    pub et: Volume,
}

pub const REGION_NAMES: [&str; 3] = ["WT", "TC", "ET"];

impl RegionMasks {
    pub fn by_name(&self, name: &str) -> Option<&Volume> {
        match name {
            "WT" => Some(&self.wt),
            "TC" => Some(&self.tc),
            "ET" => Some(&self.et),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_rejects_bad_shapes_and_spacing() {
        assert!(Volume::f32([0, 2, 2], [1.0; 3], vec![]).is_err());
        assert!(Volume::f32([2, 2, 2], [1.0, 0.0, 1.0], vec![0.0; 8]).is_err());
        assert!(Volume::f32([2, 2, 2], [1.0; 3], vec![0.0; 7]).is_err());
        assert!(Volume::f32([2, 2, 2], [1.0; 3], vec![0.0; 8]).is_ok());
    }

    #[test]
    fn index_is_x_fastest() {
        let v = Volume::f32([3, 4, 5], [1.0; 3], vec![0.0; 60]).unwrap();
        assert_eq!(v.index(0, 0, 0), 0);
        assert_eq!(v.index(1, 0, 0), 1);
        assert_eq!(v.index(0, 1, 0), 3);
        assert_eq!(v.index(0, 0, 1), 12);
        assert_eq!(v.index(2, 3, 4), 2 + 3 * 3 + 12 * 4);
    }

    #[test]
    fn scan_rejects_mismatched_grids_and_labels() {
        let v = |d| Volume::f32(d, [1.0; 3], vec![0.0; 8]).unwrap();
        let good = [v([2, 2, 2]), v([2, 2, 2]), v([2, 2, 2]), v([2, 2, 2])];
        assert!(MultiModalScan::new("a".into(), good.clone(), None).is_ok());

        let labels = Volume::u8([2, 2, 2], [1.0; 3], vec![0, 1, 2, 4, 0, 0, 0, 3]).unwrap();
        let err = MultiModalScan::new("a".into(), good.clone(), Some(labels)).unwrap_err();
        assert!(matches!(
            err,
            VolError::IllegalLabel { value: 3, index: 7 }
        ));

        let f32_labels = Volume::f32([2, 2, 2], [1.0; 3], vec![0.0; 8]).unwrap();
        assert!(MultiModalScan::new("a".into(), good, Some(f32_labels)).is_err());
    }

    #[test]
    fn modality_names_round_trip() {
        for m in MODALITIES {
            assert_eq!(m.to_string().parse::<Modality>().unwrap(), m);
        }
        assert!("t1".parse::<Modality>().is_err());
    }
}
