//! Every metric checked against an independent brute-force oracle on random
//! masks. Oracles here recompute from first principles: coordinate sets,
//! exhaustive pairwise distances, and per-voxel tallies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use segmetrics::{
    assd, confusion_counts, dice, hausdorff, precision, sensitivity, specificity,
    surface_voxels,
};
use volcore::Volume;

fn random_mask(rng: &mut ChaCha8Rng, dims: [usize; 3], density: f64) -> Volume {
    let data: Vec<u8> = (0..dims[0] * dims[1] * dims[2])
        .map(|_| u8::from(rng.gen_bool(density)))
        .collect();
    Volume::u8(dims, [1.0; 3], data).unwrap()
}

fn mask_coords(m: &Volume) -> Vec<[usize; 3]> {
    let [nx, ny, nz] = m.dims;
    let mut out = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if m.value_at(x, y, z) != 0.0 {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// Set-arithmetic tally: counts derived from coordinate sets, not from a
/// per-voxel pass.
fn oracle_counts(pred: &Volume, truth: &Volume) -> (u64, u64, u64, u64) {
    let p: std::collections::BTreeSet<[usize; 3]> = mask_coords(pred).into_iter().collect();
    let t: std::collections::BTreeSet<[usize; 3]> = mask_coords(truth).into_iter().collect();
    let total = (pred.dims[0] * pred.dims[1] * pred.dims[2]) as u64;
    let tp = p.intersection(&t).count() as u64;
    let fp = p.difference(&t).count() as u64;
    let fneg = t.difference(&p).count() as u64;
    let tn = total - tp - fp - fneg;
    (tp, fp, tn, fneg)
}

/// Neighbor-scan surface oracle over coordinate sets.
fn oracle_surface(m: &Volume) -> Vec<[usize; 3]> {
    let coords: std::collections::BTreeSet<[usize; 3]> = mask_coords(m).into_iter().collect();
    let inside = |x: i64, y: i64, z: i64| {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < m.dims[0]
            && (y as usize) < m.dims[1]
            && (z as usize) < m.dims[2]
            && coords.contains(&[x as usize, y as usize, z as usize])
    };
    coords
        .iter()
        .copied()
        .filter(|&[x, y, z]| {
            let (x, y, z) = (x as i64, y as i64, z as i64);
            [
                (x - 1, y, z),
                (x + 1, y, z),
                (x, y - 1, z),
                (x, y + 1, z),
                (x, y, z - 1),
                (x, y, z + 1),
            ]
            .iter()
            .any(|&(a, b, c)| !inside(a, b, c))
        })
        .collect()
}

/// Exhaustive pairwise surface distances with the given spacing.
fn oracle_distances(
    a: &[[usize; 3]],
    b: &[[usize; 3]],
    spacing: [f32; 3],
) -> (f64, f64) {
    let phys = |p: &[usize; 3]| {
        [
            p[0] as f64 * spacing[0] as f64,
            p[1] as f64 * spacing[1] as f64,
            p[2] as f64 * spacing[2] as f64,
        ]
    };
    let min_dist = |p: [f64; 3], set: &[[usize; 3]]| {
        set.iter()
            .map(|q| {
                let q = phys(q);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let fwd: Vec<f64> = a.iter().map(|p| min_dist(phys(p), b)).collect();
    let bwd: Vec<f64> = b.iter().map(|p| min_dist(phys(p), a)).collect();
    let max_of = |v: &[f64]| v.iter().fold(0.0f64, |m, &d| m.max(d));
    let hauf = max_of(&fwd).max(max_of(&bwd));
    let total: f64 = fwd.iter().chain(&bwd).sum();
    let avg = total / (fwd.len() + bwd.len()) as f64;
    (hauf, avg)
}

#[test]
fn confusion_counts_match_set_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let dims = [
            rng.gen_range(1..=4),
            rng.gen_range(1..=4),
            rng.gen_range(1..=4),
        ];
        let pred = random_mask(&mut rng, dims, 0.4);
        let truth = random_mask(&mut rng, dims, 0.4);
        let c = confusion_counts(&pred, &truth).unwrap();
        let (tp, fp, tn, fneg) = oracle_counts(&pred, &truth);
        assert_eq!((c.true_pos, c.false_pos, c.true_neg, c.false_neg), (tp, fp, tn, fneg));
        assert_eq!(c.total(), (dims[0] * dims[1] * dims[2]) as u64);

        // ratio metrics against direct arithmetic
        if tp + fneg > 0 {
            assert!((sensitivity(&c).unwrap() - tp as f64 / (tp + fneg) as f64).abs() < 1e-15);
        }
        if tn + fp > 0 {
            assert!((specificity(&c).unwrap() - tn as f64 / (tn + fp) as f64).abs() < 1e-15);
        }
        if tp + fp > 0 {
            assert!((precision(&c).unwrap() - tp as f64 / (tp + fp) as f64).abs() < 1e-15);
        }
        if 2 * tp + fp + fneg > 0 {
            assert!((dice(&c) - 2.0 * tp as f64 / (2 * tp + fp + fneg) as f64).abs() < 1e-15);
        }
    }
}

#[test]
fn surface_voxels_match_neighbor_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let dims = [
            rng.gen_range(1..=8),
            rng.gen_range(1..=8),
            rng.gen_range(1..=8),
        ];
        let mask = random_mask(&mut rng, dims, 0.5);
        let got: Vec<[usize; 3]> = surface_voxels(&mask).points;
        let mut want = oracle_surface(&mask);
        want.sort_unstable();
        let mut got_sorted = got.clone();
        got_sorted.sort_unstable();
        assert_eq!(got_sorted, want);
    }
}

#[test]
fn fast_distances_match_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut nonempty_pairs = 0;
    for trial in 0..60 {
        let dims = [
            rng.gen_range(2..=16),
            rng.gen_range(2..=16),
            rng.gen_range(2..=16),
        ];
        let spacing = [
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        ];
        let mut pred = random_mask(&mut rng, dims, 0.15);
        let mut truth = random_mask(&mut rng, dims, 0.15);
        pred.spacing = spacing;
        truth.spacing = spacing;
        let ps = surface_voxels(&pred);
        let ts = surface_voxels(&truth);
        if ps.is_empty() || ts.is_empty() {
            continue;
        }
        nonempty_pairs += 1;
        let (want_h, want_a) = oracle_distances(&ps.points, &ts.points, spacing);
        let got_h = hausdorff(&ps, &ts, None).unwrap();
        let got_a = assd(&ps, &ts).unwrap();
        assert!(
            (got_h - want_h).abs() < 1e-9,
            "trial {trial}: hausdorff {got_h} vs oracle {want_h}"
        );
        assert!(
            (got_a - want_a).abs() < 1e-9,
            "trial {trial}: assd {got_a} vs oracle {want_a}"
        );
    }
    assert!(nonempty_pairs >= 50, "only {nonempty_pairs} usable pairs");
}

#[test]
fn percentile_hausdorff_matches_sorted_rank_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..30 {
        let dims = [12, 12, 12];
        let pred = random_mask(&mut rng, dims, 0.1);
        let truth = random_mask(&mut rng, dims, 0.1);
        let ps = surface_voxels(&pred);
        let ts = surface_voxels(&truth);
        if ps.is_empty() || ts.is_empty() {
            continue;
        }
        let pct = rng.gen_range(50.0..100.0);

        // oracle: sort each directed list, take nearest-rank entry, outer max
        let directed = |a: &[[usize; 3]], b: &[[usize; 3]]| -> f64 {
            let phys = |p: &[usize; 3]| [p[0] as f64, p[1] as f64, p[2] as f64];
            let mut ds: Vec<f64> = a
                .iter()
                .map(|p| {
                    let p = phys(p);
                    b.iter()
                        .map(|q| {
                            let q = phys(q);
                            ((p[0] - q[0]).powi(2)
                                + (p[1] - q[1]).powi(2)
                                + (p[2] - q[2]).powi(2))
                            .sqrt()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            ds.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let rank = ((pct / 100.0) * ds.len() as f64).ceil() as usize;
            ds[rank.clamp(1, ds.len()) - 1]
        };
        let want = directed(&ps.points, &ts.points).max(directed(&ts.points, &ps.points));
        let got = hausdorff(&ps, &ts, Some(pct)).unwrap();
        assert!((got - want).abs() < 1e-9);
    }
}
