//! Contextual detection geometry: multi-scale window grids, positive windows
//! doubled around ground truth, greedy negative-window mining from leftover
//! proposals, IoU-based proposal labeling, and the 2D-to-3D detection lift.

pub mod aggregate;
pub mod error;
pub mod geom;
pub mod proposals;
pub mod scale;
pub mod textio;
pub mod windows;

pub use aggregate::aggregate_detections;
pub use error::{CtxError, Result};
pub use geom::{iou, Rect};
pub use proposals::{
    assign_proposal_labels, decode_deltas, encode_deltas, oracle_proposals, LabeledProposal,
    OracleSource, PropLabel, Proposal, ProposalSource, SliceContext,
};
pub use scale::{resize_slice, ScaleSpec};
pub use textio::{read_records, write_records, TextRecord};
pub use windows::{enumerate_windows, negative_windows, positive_windows, Window, WindowKind};
