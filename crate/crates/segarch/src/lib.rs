//! Network assembly, training, and cascaded inference for tumor
//! segmentation: a multi-resolution 3D encoder-decoder with parallel dilated
//! paths, a lightweight 2D slice detector, and the detect-crop-segment
//! pipeline joining them.

pub mod cascade;
pub mod config;
pub mod detector;
pub mod error;
pub mod layers;
pub mod segnet;
pub mod train;

pub use cascade::{
    detect_slices, infer_cascade, oracle_slice_boxes, repair_label, slice_tensor, CascadeOutcome,
};
pub use config::{CascadeConfig, DetectorConfig, SegNetConfig};
pub use detector::{
    anchor_rect, anchor_targets, detector_loss, AnchoredTarget, DetGrads, Detector, DetectorSource,
};
pub use error::{ArchError, Result};
pub use layers::{ConvLayer, LayerGrads};
pub use segnet::{
    audit_shapes, region_probs, region_probs_backward, SegGrads, SegNet, ShapeAudit,
};
pub use train::{
    detector_accuracy, hard_region_dice, region_dice_loss, train_detector, train_seg,
    z_score_per_channel, DetectorSample, SegSample, TrainOpts, TrainReport,
};
