//! Network and cascade configuration.

use crate::error::{ArchError, Result};

/// Segmentation encoder-decoder layout.
///
/// Three resolution stages: full resolution with vanilla convolutions,
/// pooled half resolution with vanilla convolutions, and pooled quarter
/// resolution with two parallel atrous paths. Every stage output is
/// upsampled to full resolution and concatenated before a 1x1x1 class head.
#[derive(Clone, Debug, PartialEq)]
pub struct SegNetConfig {
    /// Input channels; 4 for the four MRI modalities.
    pub in_channels: usize,
    /// Stage widths: full res, half res, and the two parallel quarter-res
    /// atrous paths. Default (32, 64, 128, 256).
    pub channels: [usize; 4],
    /// Dilation rates of the two parallel quarter-resolution paths
    /// (3x3x3 kernels; rates 2 and 3 by default).
    pub dilations: [usize; 2],
    /// Vanilla convolutions per stage (also per atrous path).
    pub convs_per_stage: usize,
    /// Training patch dims (W, H, D); W = H.
    pub patch_dims: [usize; 3],
    /// Output classes: background plus the three tumor labels.
    pub classes: usize,
    /// Training batch size.
    pub batch: usize,
    /// Channel groups for optional per-group feature normalization after
    /// each stage convolution; 0 disables normalization entirely.
    pub norm_groups: usize,
}

impl Default for SegNetConfig {
    fn default() -> Self {
        SegNetConfig {
            in_channels: 4,
            channels: [32, 64, 128, 256],
            dilations: [2, 3],
            convs_per_stage: 2,
            patch_dims: [64, 64, 64],
            classes: 4,
            batch: 4,
            norm_groups: 0,
        }
    }
}

impl SegNetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.classes < 2 {
            return Err(ArchError::ConfigInvalid(
                "need at least 1 input channel and 2 classes".into(),
            ));
        }
        if !self.channels.windows(2).all(|w| w[0] < w[1]) {
            return Err(ArchError::ConfigInvalid(format!(
                "channel plan must be strictly increasing, got {:?}",
                self.channels
            )));
        }
        if self.dilations.iter().any(|&d| d == 0) {
            return Err(ArchError::ConfigInvalid("dilation rates must be >= 1".into()));
        }
        if self.convs_per_stage == 0 {
            return Err(ArchError::ConfigInvalid("need >= 1 conv per stage".into()));
        }
        if self.patch_dims.iter().any(|&d| d == 0) {
            return Err(ArchError::ConfigInvalid("patch dims must be >= 1".into()));
        }
        if self.patch_dims[0] != self.patch_dims[1] {
            return Err(ArchError::ConfigInvalid(format!(
                "patch W and H must match, got {:?}",
                self.patch_dims
            )));
        }
        if self.batch == 0 {
            return Err(ArchError::ConfigInvalid("batch must be >= 1".into()));
        }
        if self.norm_groups > 0 {
            for (i, &c) in self.channels.iter().enumerate() {
                if c % self.norm_groups != 0 {
                    return Err(ArchError::ConfigInvalid(format!(
                        "norm groups {} do not divide stage {} width {}",
                        self.norm_groups, i, c
                    )));
                }
            }
        }
        Ok(())
    }

    /// Channel count of the concatenated multi-resolution feature map.
    pub fn concat_channels(&self) -> usize {
        self.channels.iter().sum()
    }
}

/// Slice detector layout: a small stride-1 2D trunk over a scaled slice and
/// a per-anchor head.
///
/// Each anchor emits five values — one objectness score and four box deltas.
/// The score is carried as a two-logit softmax pair, so the head produces
/// six channels per anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Slice channels: 1 uses FLAIR only, 4 stacks all modalities.
    pub in_channels: usize,
    /// Trunk widths (two stride-1 3x3 convolutions).
    pub trunk_channels: [usize; 2],
    /// Square anchor box side lengths, in scaled-slice pixels.
    pub anchor_sizes: Vec<usize>,
    /// Detections below this objectness score are discarded.
    pub score_floor: f64,
    /// Semantic outputs per anchor: objectness + 4 deltas.
    pub outputs_per_anchor: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            in_channels: 1,
            trunk_channels: [8, 16],
            anchor_sizes: vec![16, 32],
            score_floor: 0.5,
            outputs_per_anchor: 5,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.in_channels != 1 && self.in_channels != 4 {
            return Err(ArchError::ConfigInvalid(format!(
                "detector slice channels must be 1 (FLAIR) or 4 (all modalities), got {}",
                self.in_channels
            )));
        }
        if self.trunk_channels.iter().any(|&c| c == 0) {
            return Err(ArchError::ConfigInvalid("trunk widths must be >= 1".into()));
        }
        if self.anchor_sizes.is_empty() || self.anchor_sizes.iter().any(|&a| a == 0) {
            return Err(ArchError::ConfigInvalid(
                "need at least one nonzero anchor size".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.score_floor) {
            return Err(ArchError::ConfigInvalid(format!(
                "score floor {} outside [0,1]",
                self.score_floor
            )));
        }
        if self.outputs_per_anchor != 5 {
            return Err(ArchError::ConfigInvalid(format!(
                "each anchor carries exactly 5 values (objectness + 4 deltas), got {}",
                self.outputs_per_anchor
            )));
        }
        Ok(())
    }

    /// Head channels per anchor: the objectness logit pair plus 4 deltas.
    pub fn head_channels_per_anchor(&self) -> usize {
        6
    }

    pub fn head_channels(&self) -> usize {
        self.anchor_sizes.len() * self.head_channels_per_anchor()
    }
}

/// How the two networks are composed at inference.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeConfig {
    /// Margin added to every side of the detected 3D box before cropping.
    pub f_offset: usize,
    /// Resolution the cropped region is resampled to for segmentation.
    pub infer_patch_dims: [usize; 3],
    /// Detections below this score never enter the 3D aggregate.
    pub score_floor: f64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            f_offset: 6,
            infer_patch_dims: [64, 64, 64],
            score_floor: 0.5,
        }
    }
}
