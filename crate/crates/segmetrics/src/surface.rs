//! Boundary-voxel extraction under 6-connectivity.

use volcore::Volume;

use crate::counts::foreground;

/// Boundary voxels of one binary mask, with the grid spacing they live on.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSet {
    /// Voxel coordinates (x, y, z) of every boundary voxel.
    pub points: Vec<[usize; 3]>,
    /// Physical voxel spacing in mm per axis.
    pub spacing: [f32; 3],
}

impl SurfaceSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Physical coordinates of the voxel centers, spacing-scaled.
    pub fn physical_points(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(|p| {
                [
                    p[0] as f64 * self.spacing[0] as f64,
                    p[1] as f64 * self.spacing[1] as f64,
                    p[2] as f64 * self.spacing[2] as f64,
                ]
            })
            .collect()
    }
}

/// Foreground voxels with at least one background or out-of-volume
/// 6-connected neighbor. Any nonzero voxel counts as foreground.
pub fn surface_voxels(mask: &Volume) -> SurfaceSet {
    let [nx, ny, nz] = mask.dims;
    let at = |x: usize, y: usize, z: usize| foreground(mask, x + nx * (y + ny * z));
    let mut points = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !at(x, y, z) {
                    continue;
                }
                let exposed = (x == 0 || !at(x - 1, y, z))
                    || (x + 1 == nx || !at(x + 1, y, z))
                    || (y == 0 || !at(x, y - 1, z))
                    || (y + 1 == ny || !at(x, y + 1, z))
                    || (z == 0 || !at(x, y, z - 1))
                    || (z + 1 == nz || !at(x, y, z + 1));
                if exposed {
                    points.push([x, y, z]);
                }
            }
        }
    }
    SurfaceSet {
        points,
        spacing: mask.spacing,
    }
}
