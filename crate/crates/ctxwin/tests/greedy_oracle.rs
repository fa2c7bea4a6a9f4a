//! Negative-window mining checked against an independent greedy simulation.
//!
//! The oracle recomputes coverage with exact integer arithmetic (doubled
//! coordinates instead of fractional centers) and explicit uncovered-sets,
//! sharing no code with the library's selection loop.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ctxwin::{enumerate_windows, negative_windows, Proposal, Rect, Window, WindowKind};

/// Center of `r` in doubled coordinates: (x0+x1, y0+y1).
fn doubled_center(r: &Rect) -> (i64, i64) {
    (r.x0 + r.x1, r.y0 + r.y1)
}

/// Does `w` contain the doubled-coordinate point?
fn holds(w: &Rect, c2: (i64, i64)) -> bool {
    2 * w.x0 <= c2.0 && c2.0 <= 2 * w.x1 && 2 * w.y0 <= c2.1 && c2.1 <= 2 * w.y1
}

fn oracle_greedy(
    proposals: &[Proposal],
    positives: &[Window],
    grid: &[Rect],
    min_proposals: usize,
) -> Vec<Rect> {
    let leftover: Vec<(i64, i64)> = proposals
        .iter()
        .map(|p| doubled_center(&p.rect))
        .filter(|&c2| !positives.iter().any(|w| holds(&w.rect, c2)))
        .collect();

    // per-window sets of leftover-proposal indices
    let sets: Vec<Vec<usize>> = grid
        .iter()
        .map(|w| {
            (0..leftover.len())
                .filter(|&i| holds(w, leftover[i]))
                .collect()
        })
        .collect();

    let mut used = vec![false; leftover.len()];
    let mut out = Vec::new();
    loop {
        let mut best_idx = None;
        let mut best_gain = 0usize;
        for (wi, set) in sets.iter().enumerate() {
            let gain = set.iter().filter(|&&i| !used[i]).count();
            if gain > best_gain {
                best_gain = gain;
                best_idx = Some(wi);
            }
        }
        let Some(wi) = best_idx else { break };
        if best_gain < min_proposals {
            break;
        }
        for &i in &sets[wi] {
            used[i] = true;
        }
        out.push(grid[wi]);
    }
    out
}

fn random_rect(rng: &mut ChaCha8Rng, dims: (usize, usize)) -> Rect {
    let x0 = rng.gen_range(0..dims.0 as i64);
    let y0 = rng.gen_range(0..dims.1 as i64);
    let x1 = rng.gen_range(x0..dims.0 as i64);
    let y1 = rng.gen_range(y0..dims.1 as i64);
    Rect::new(x0, y0, x1, y1).unwrap()
}

#[test]
fn selection_matches_bruteforce_greedy_on_random_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let dims = (64usize, 64usize);
        let grid = enumerate_windows(dims, (16, 16), 8).unwrap();
        let n_props = rng.gen_range(0..=20);
        let proposals: Vec<Proposal> = (0..n_props)
            .map(|_| Proposal {
                rect: random_rect(&mut rng, dims),
                score: rng.gen_range(0.0..=1.0),
                slice_z: 0,
                scale_id: 0,
            })
            .collect();
        let n_pos = rng.gen_range(0..=2);
        let positives: Vec<Window> = (0..n_pos)
            .map(|_| Window {
                rect: random_rect(&mut rng, dims),
                scale_id: 0,
                kind: WindowKind::Positive,
            })
            .collect();
        let min_proposals = rng.gen_range(1..=3);

        let got: Vec<Rect> = negative_windows(&proposals, &positives, &grid, min_proposals, 0)
            .iter()
            .map(|w| w.rect)
            .collect();
        let want = oracle_greedy(&proposals, &positives, &grid, min_proposals);
        assert_eq!(got, want);
    }
}

#[test]
fn selected_windows_never_cover_positive_centers() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let dims = (48usize, 48usize);
        let grid = enumerate_windows(dims, (12, 12), 6).unwrap();
        let proposals: Vec<Proposal> = (0..15)
            .map(|_| Proposal {
                rect: random_rect(&mut rng, dims),
                score: 0.5,
                slice_z: 0,
                scale_id: 0,
            })
            .collect();
        let positives = vec![Window {
            rect: random_rect(&mut rng, dims),
            scale_id: 0,
            kind: WindowKind::Positive,
        }];
        let negs = negative_windows(&proposals, &positives, &grid, 2, 0);

        // replay selection: each pick must add >= 2 fresh centers, and no
        // positive-covered center ever counts
        let leftover: Vec<(i64, i64)> = proposals
            .iter()
            .map(|p| doubled_center(&p.rect))
            .filter(|&c| !holds(&positives[0].rect, c))
            .collect();
        let mut used = vec![false; leftover.len()];
        for w in &negs {
            let fresh: Vec<usize> = (0..leftover.len())
                .filter(|&i| !used[i] && holds(&w.rect, leftover[i]))
                .collect();
            assert!(fresh.len() >= 2, "window picked with < P fresh centers");
            for i in fresh {
                used[i] = true;
            }
        }
    }
}
