//! Label decomposition into the three nested tumor regions, and mask bounding
//! boxes.
//!
//! BRATS label coding: 0 background, 1 necrotic/non-enhancing core, 2 edema,
//! 4 enhancing tumor (3 unused). Whole tumor is {1, 2, 4}, tumor core
//! {1, 4}, enhancing tumor {4}, so the regions nest by construction.

use crate::boxes::Box3;
use crate::error::{Result, VolError};
use crate::volume::{RegionMasks, Volume, VoxelData};

pub fn decompose_regions(labels: &Volume) -> Result<RegionMasks> {
    let vals = labels.as_u8().ok_or_else(|| {
        VolError::InvalidVolume("region decomposition needs a uint8 label volume".into())
    })?;
    let n = vals.len();
    let mut wt = vec![0u8; n];
    let mut tc = vec![0u8; n];
    let mut et = vec![0u8; n];
    for (i, &v) in vals.iter().enumerate() {
        match v {
            0 => {}
            1 => {
                wt[i] = 1;
                tc[i] = 1;
            }
            2 => {
                wt[i] = 1;
            }
            4 => {
                wt[i] = 1;
                tc[i] = 1;
                et[i] = 1;
            }
            other => return Err(VolError::IllegalLabel {
                value: other,
                index: i,
            }),
        }
    }
    let mk = |data: Vec<u8>| Volume {
        dims: labels.dims,
        spacing: labels.spacing,
        data: VoxelData::U8(data),
    };
    Ok(RegionMasks {
        wt: mk(wt),
        tc: mk(tc),
        et: mk(et),
    })
}

/// Tightest box around the nonzero voxels; `None` when the mask is empty.
pub fn bbox_of_mask(mask: &Volume) -> Option<Box3> {
    let [nx, ny, nz] = mask.dims;
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if mask.value_at(x, y, z) != 0.0 {
                    any = true;
                    let p = [x, y, z];
                    for a in 0..3 {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a]);
                    }
                }
            }
        }
    }
    if any {
        Some(Box3 { min: lo, max: hi })
    } else {
        None
    }
}
