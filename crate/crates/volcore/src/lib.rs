//! Volumetric scan data model: grids with physical spacing, the VVL1 binary
//! file format, BRATS label decomposition into nested tumor regions, and the
//! crop/resize geometry that hands detected regions to the segmentation
//! network.

pub mod boxes;
pub mod error;
pub mod format;
pub mod regions;
pub mod resample;
pub mod volume;

pub use boxes::Box3;
pub use error::{Result, VolError};
pub use format::{read_meta, read_volume, write_meta, write_volume, VolumeMeta};
pub use regions::{bbox_of_mask, decompose_regions};
pub use resample::{crop_resize, crop_resize_labels, crop_resize_volume, ResampleMode};
pub use volume::{Modality, MultiModalScan, RegionMasks, Volume, VoxelData, MODALITIES, REGION_NAMES};
