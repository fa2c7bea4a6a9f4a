//! Inclusive integer voxel boxes.

use crate::error::{Result, VolError};

/// Axis-aligned box with inclusive min and max voxel indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Box3 {
    pub min: [usize; 3],
    pub max: [usize; 3],
}

impl Box3 {
    pub fn new(min: [usize; 3], max: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if min[a] > max[a] {
                return Err(VolError::DegenerateBox(format!(
                    "min {:?} exceeds max {:?} on axis {}",
                    min, max, a
                )));
            }
        }
        Ok(Box3 { min, max })
    }

    pub fn extents(&self) -> [usize; 3] {
        [
            self.max[0] - self.min[0] + 1,
            self.max[1] - self.min[1] + 1,
            self.max[2] - self.min[2] + 1,
        ]
    }

    pub fn voxel_count(&self) -> usize {
        self.extents().iter().product()
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn fits_within(&self, dims: [usize; 3]) -> bool {
        (0..3).all(|a| self.max[a] < dims[a])
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &Box3) -> Box3 {
        Box3 {
            min: [
                self.min[0].min(other.min[0]),
                self.min[1].min(other.min[1]),
                self.min[2].min(other.min[2]),
            ],
            max: [
                self.max[0].max(other.max[0]),
                self.max[1].max(other.max[1]),
                self.max[2].max(other.max[2]),
            ],
        }
    }

    /// Grows by `offset` voxels on every axis in both directions, clipping to
    /// the host volume instead of padding past its bounds.
    pub fn grow_clip(&self, offset: usize, dims: [usize; 3]) -> Box3 {
        let mut min = [0usize; 3];
        let mut max = [0usize; 3];
        for a in 0..3 {
            min[a] = self.min[a].saturating_sub(offset);
            max[a] = (self.max[a] + offset).min(dims[a] - 1);
        }
        Box3 { min, max }
    }
}
