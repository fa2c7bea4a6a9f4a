//! Proposals, IoU-based label assignment, and box-delta regression targets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{iou, Rect};
use crate::windows::Window;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposal {
    pub rect: Rect,
    /// Objectness in [0, 1].
    pub score: f64,
    pub slice_z: usize,
    pub scale_id: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropLabel {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledProposal {
    pub proposal: Proposal,
    pub label: PropLabel,
    /// (dx, dy, dw, dh) toward the matched ground-truth box; present iff positive.
    pub regression_target: Option<[f64; 4]>,
}

/// Normalized center/log-size deltas mapping `from` onto `to`.
pub fn encode_deltas(from: &Rect, to: &Rect) -> [f64; 4] {
    let (pcx, pcy) = from.center();
    let (gcx, gcy) = to.center();
    let (pw, ph) = (from.width() as f64, from.height() as f64);
    let (gw, gh) = (to.width() as f64, to.height() as f64);
    [
        (gcx - pcx) / pw,
        (gcy - pcy) / ph,
        (gw / pw).ln(),
        (gh / ph).ln(),
    ]
}

/// Apply deltas to a box and round back to integer pixels. Exactly inverts
/// `encode_deltas` for integer boxes; degenerate sizes collapse to the
/// center pixel.
pub fn decode_deltas(from: &Rect, deltas: [f64; 4]) -> Rect {
    let (pcx, pcy) = from.center();
    let (pw, ph) = (from.width() as f64, from.height() as f64);
    let cx = pcx + deltas[0] * pw;
    let cy = pcy + deltas[1] * ph;
    let w = pw * deltas[2].exp();
    let h = ph * deltas[3].exp();
    let x0 = (cx - (w - 1.0) / 2.0).round() as i64;
    let x1 = (cx + (w - 1.0) / 2.0).round() as i64;
    let y0 = (cy - (h - 1.0) / 2.0).round() as i64;
    let y1 = (cy + (h - 1.0) / 2.0).round() as i64;
    if x0 <= x1 && y0 <= y1 {
        Rect { x0, y0, x1, y1 }
    } else {
        let (px, py) = (cx.round() as i64, cy.round() as i64);
        Rect {
            x0: px,
            y0: py,
            x1: px,
            y1: py,
        }
    }
}

/// Label proposals against ground truth: positive iff the best IoU exceeds
/// `threshold` (first-best ties), with regression targets toward that box.
/// Proposals whose center falls outside every given window are dropped.
pub fn assign_proposal_labels(
    proposals: &[Proposal],
    gt_boxes: &[Rect],
    threshold: f64,
    windows: &[Window],
) -> Vec<LabeledProposal> {
    proposals
        .iter()
        .filter(|p| {
            let (cx, cy) = p.rect.center();
            windows.iter().any(|w| w.rect.contains_point(cx, cy))
        })
        .map(|p| {
            let mut best: Option<(usize, f64)> = None;
            for (gi, gt) in gt_boxes.iter().enumerate() {
                let v = iou(&p.rect, gt);
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((gi, v));
                }
            }
            match best {
                Some((gi, v)) if v > threshold => LabeledProposal {
                    proposal: *p,
                    label: PropLabel::Positive,
                    regression_target: Some(encode_deltas(&p.rect, &gt_boxes[gi])),
                },
                _ => LabeledProposal {
                    proposal: *p,
                    label: PropLabel::Negative,
                    regression_target: None,
                },
            }
        })
        .collect()
}

fn jittered_box(gt: &Rect, dims: (usize, usize), rng: &mut ChaCha8Rng) -> Rect {
    let (cx, cy) = gt.center();
    let (w, h) = (gt.width() as f64, gt.height() as f64);
    let cx = cx + rng.gen_range(-0.25..=0.25) * w;
    let cy = cy + rng.gen_range(-0.25..=0.25) * h;
    let w = w * (1.0 + rng.gen_range(-0.25..=0.25));
    let h = h * (1.0 + rng.gen_range(-0.25..=0.25));
    let raw = Rect {
        x0: (cx - (w - 1.0) / 2.0).round() as i64,
        y0: (cy - (h - 1.0) / 2.0).round() as i64,
        x1: (cx + (w - 1.0) / 2.0).round() as i64,
        y1: (cy + (h - 1.0) / 2.0).round() as i64,
    };
    raw.clip(dims.0, dims.1).unwrap_or_else(|| {
        let px = (cx.round() as i64).clamp(0, dims.0 as i64 - 1);
        let py = (cy.round() as i64).clamp(0, dims.1 as i64 - 1);
        Rect {
            x0: px,
            y0: py,
            x1: px,
            y1: py,
        }
    })
}

fn uniform_box(dims: (usize, usize), rng: &mut ChaCha8Rng) -> Rect {
    let mut xs = [
        rng.gen_range(0..dims.0 as i64),
        rng.gen_range(0..dims.0 as i64),
    ];
    let mut ys = [
        rng.gen_range(0..dims.1 as i64),
        rng.gen_range(0..dims.1 as i64),
    ];
    xs.sort_unstable();
    ys.sort_unstable();
    Rect {
        x0: xs[0],
        y0: ys[0],
        x1: xs[1],
        y1: ys[1],
    }
}

/// Seeded stand-in for a learned proposal network: alternates ground-truth
/// jitters (uniform ±25% center and size perturbation) with uniform random
/// boxes; without ground truth every box is uniform. Scores are uniform [0,1].
pub fn oracle_proposals(
    gt_boxes: &[Rect],
    scaled_dims: (usize, usize),
    slice_z: usize,
    scale_id: usize,
    seed: u64,
    count: usize,
) -> Vec<Proposal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let rect = if !gt_boxes.is_empty() && i % 2 == 0 {
                jittered_box(&gt_boxes[(i / 2) % gt_boxes.len()], scaled_dims, &mut rng)
            } else {
                uniform_box(scaled_dims, &mut rng)
            };
            Proposal {
                rect,
                score: rng.gen_range(0.0..=1.0),
                slice_z,
                scale_id,
            }
        })
        .collect()
}

/// How a slice is presented to a proposal source.
pub struct SliceContext<'a> {
    pub scale_id: usize,
    pub slice_z: usize,
    pub scaled_dims: (usize, usize),
    /// Scaled slice pixels, x fastest.
    pub image: &'a [f32],
    /// Ground-truth boxes on this scaled slice; empty at inference.
    pub gt_boxes: &'a [Rect],
}

/// Pluggable proposal generator; implementations are selected by name.
pub trait ProposalSource {
    fn name(&self) -> &'static str;
    fn propose(&self, ctx: &SliceContext<'_>, count: usize) -> Vec<Proposal>;
}

/// Seeded oracle source; mixes the slice coordinates into the seed so
/// different slices draw different boxes.
pub struct OracleSource {
    pub seed: u64,
}

impl ProposalSource for OracleSource {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn propose(&self, ctx: &SliceContext<'_>, count: usize) -> Vec<Proposal> {
        let mix = self
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add((ctx.slice_z as u64) << 8)
            .wrapping_add(ctx.scale_id as u64);
        oracle_proposals(
            ctx.gt_boxes,
            ctx.scaled_dims,
            ctx.slice_z,
            ctx.scale_id,
            mix,
            count,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::WindowKind;

    fn window_at(rect: Rect) -> Window {
        Window {
            rect,
            scale_id: 0,
            kind: WindowKind::Negative,
        }
    }

    #[test]
    fn identity_deltas_are_zero() {
        let r = Rect::new(3, 4, 10, 12).unwrap();
        assert_eq!(encode_deltas(&r, &r), [0.0; 4]);
    }

    #[test]
    fn decode_inverts_encode_on_integer_boxes() {
        let from = Rect::new(5, 8, 20, 19).unwrap();
        let to = Rect::new(2, 11, 27, 16).unwrap();
        let deltas = encode_deltas(&from, &to);
        assert_eq!(decode_deltas(&from, deltas), to);
    }

    #[test]
    fn degenerate_decode_collapses_to_center_pixel() {
        let from = Rect::new(10, 10, 13, 13).unwrap();
        let out = decode_deltas(&from, [0.0, 0.0, -6.0, -6.0]);
        assert_eq!(out, Rect::new(12, 12, 12, 12).unwrap());
    }

    #[test]
    fn matching_proposal_is_positive_with_zero_target() {
        let gt = Rect::new(10, 10, 19, 19).unwrap();
        let p = Proposal {
            rect: gt,
            score: 0.9,
            slice_z: 0,
            scale_id: 0,
        };
        let win = window_at(Rect::new(0, 0, 63, 63).unwrap());
        let out = assign_proposal_labels(&[p], &[gt], 0.5, &[win]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, PropLabel::Positive);
        assert_eq!(out[0].regression_target, Some([0.0; 4]));
    }

    #[test]
    fn disjoint_proposal_is_negative_without_target() {
        let gt = Rect::new(40, 40, 49, 49).unwrap();
        let p = Proposal {
            rect: Rect::new(0, 0, 5, 5).unwrap(),
            score: 0.9,
            slice_z: 0,
            scale_id: 0,
        };
        let win = window_at(Rect::new(0, 0, 63, 63).unwrap());
        let out = assign_proposal_labels(&[p], &[gt], 0.5, &[win]);
        assert_eq!(out[0].label, PropLabel::Negative);
        assert!(out[0].regression_target.is_none());
    }

    #[test]
    fn low_overlap_stays_negative() {
        let p = Proposal {
            rect: Rect::new(0, 0, 3, 3).unwrap(),
            score: 0.5,
            slice_z: 0,
            scale_id: 0,
        };
        let gt = Rect::new(2, 2, 5, 5).unwrap();
        let win = window_at(Rect::new(0, 0, 63, 63).unwrap());
        let out = assign_proposal_labels(&[p], &[gt], 0.5, &[win]);
        assert_eq!(out[0].label, PropLabel::Negative);
    }

    #[test]
    fn proposal_outside_all_windows_is_dropped() {
        let p = Proposal {
            rect: Rect::new(50, 50, 59, 59).unwrap(),
            score: 0.5,
            slice_z: 0,
            scale_id: 0,
        };
        let win = window_at(Rect::new(0, 0, 15, 15).unwrap());
        assert!(assign_proposal_labels(&[p], &[], 0.5, &[win]).is_empty());
    }

    #[test]
    fn oracle_is_deterministic_and_sized() {
        let gt = [Rect::new(10, 10, 29, 29).unwrap()];
        let a = oracle_proposals(&gt, (64, 64), 3, 1, 42, 300);
        let b = oracle_proposals(&gt, (64, 64), 3, 1, 42, 300);
        assert_eq!(a.len(), 300);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..=1.0).contains(&p.score)));
        assert!(a.iter().all(|p| p.rect.within(64, 64)));
        assert!(a.iter().all(|p| p.slice_z == 3 && p.scale_id == 1));
    }

    #[test]
    fn oracle_without_gt_is_all_uniform() {
        let out = oracle_proposals(&[], (32, 32), 0, 0, 7, 50);
        assert_eq!(out.len(), 50);
        assert!(out.iter().all(|p| p.rect.within(32, 32)));
    }

    #[test]
    fn oracle_source_varies_by_slice() {
        let src = OracleSource { seed: 9 };
        let ctx = |z| SliceContext {
            scale_id: 0,
            slice_z: z,
            scaled_dims: (64, 64),
            image: &[],
            gt_boxes: &[],
        };
        let a = src.propose(&ctx(0), 20);
        let b = src.propose(&ctx(1), 20);
        assert_ne!(a, b);
        assert_eq!(a, src.propose(&ctx(0), 20));
    }
}
