mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::RngExt;
use vtspot_core::geometry::{giou, RotatedBox};
use vtspot_core::matching::{
    angle_loss, assign_rectangular, hungarian, match_sets, pair_cost, set_loss, set_loss_terms, CostWeights,
    GroundTruthInstance, MatchingError, PredictedInstance,
};

use common::{brute_min_cost, brute_min_cost_int, permutations};

fn rb(cx: f64, cy: f64, w: f64, h: f64, a: f64) -> RotatedBox {
    RotatedBox::new(cx, cy, w, h, a).unwrap()
}

fn int_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=7).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-50i64..50, n), n))
}

fn real_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), n))
}

fn as_f64(m: &[Vec<i64>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
}

#[test]
fn hungarian_examples() {
    let a = hungarian(&[vec![5.0]]).unwrap();
    assert_eq!((a.pairs, a.total_cost), (vec![(0, 0)], 5.0));
    let a = hungarian(&[vec![0.0, 9.0], vec![9.0, 0.0]]).unwrap();
    assert_eq!((a.pairs, a.total_cost), (vec![(0, 0), (1, 1)], 0.0));
    assert_eq!(hungarian(&[vec![1.0, f64::NAN], vec![0.0, 0.0]]), Err(MatchingError::NonFiniteCost { row: 0, col: 1 }));
    assert_eq!(hungarian(&[]), Err(MatchingError::EmptyMatrix));
}

#[test]
fn ties_resolve_to_lowest_indices() {
    let a = hungarian(&vec![vec![1.0; 4]; 4]).unwrap();
    assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    let a = hungarian(&[vec![3.0, 1.0, 1.0], vec![1.0, 3.0, 1.0], vec![1.0, 1.0, 3.0]]).unwrap();
    assert_eq!(a.total_cost, 3.0);
    assert_eq!(a.pairs, vec![(0, 1), (1, 2), (2, 0)]);
}

#[test]
fn permutation_oracle_is_complete() {
    assert_eq!(permutations(0).len(), 1);
    assert_eq!(permutations(5).len(), 120);
    let mut all = permutations(4);
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 24);
}

#[test]
fn rectangular_padding() {
    let pairs = assign_rectangular(&[vec![0.2, 0.9, 0.1]], 3, 1.0).unwrap();
    assert_eq!(pairs, vec![(0, 2)]);
    let pairs = assign_rectangular(&[vec![0.5], vec![0.1], vec![0.7]], 1, 1.0).unwrap();
    assert_eq!(pairs, vec![(1, 0)]);
    assert!(assign_rectangular(&[], 0, 1.0).unwrap().is_empty());
    assert!(assign_rectangular(&[], 3, 1.0).unwrap().is_empty());
}

#[test]
fn pair_cost_examples() {
    let gt = rb(0.5, 0.5, 0.2, 0.1, 0.0);
    let pred = rb(0.6, 0.5, 0.2, 0.1, 0.0);
    let unit = CostWeights::unit();
    let expected = -0.8 + 0.1 + (1.0 - giou(&gt, &pred));
    let got = pair_cost(&GroundTruthInstance::Object(gt), &PredictedInstance::new(0.8, pred).unwrap(), &unit);
    assert!((got - expected).abs() < 1e-12);
    // Independent GIoU for this pair: intersection 0.1×0.1, union 0.03,
    // hull 0.3×0.1.
    let giou_hand = 0.01 / 0.03 - (0.03 - 0.03) / 0.03;
    assert!((giou(&gt, &pred) - giou_hand).abs() < 1e-12);
    let perfect = PredictedInstance::new(1.0, gt).unwrap();
    assert_eq!(pair_cost(&GroundTruthInstance::Object(gt), &perfect, &unit), -1.0);
    assert_eq!(pair_cost(&GroundTruthInstance::NoObject, &perfect, &unit), 0.0);
}

#[test]
fn no_object_set_costs_zero() {
    let preds: Vec<_> =
        (0..4).map(|i| PredictedInstance::new(0.3, rb(i as f64, 0.0, 1.0, 1.0, 0.0)).unwrap()).collect();
    let a = match_sets(&[GroundTruthInstance::NoObject; 4], &preds, &CostWeights::default()).unwrap();
    assert_eq!(a.total_cost, 0.0);
    assert!(matches!(
        match_sets(&[GroundTruthInstance::NoObject; 3], &preds, &CostWeights::default()),
        Err(MatchingError::SizeMismatch { gts: 3, preds: 4 })
    ));
}

#[test]
fn padded_match_equals_enumeration() {
    let mut r = common::rng(77);
    let w = CostWeights::default();
    for _ in 0..50 {
        let mut gts: Vec<GroundTruthInstance> = (0..5)
            .map(|_| {
                GroundTruthInstance::Object(rb(
                    r.random_range(0.1..0.9),
                    r.random_range(0.1..0.9),
                    r.random_range(0.05..0.3),
                    r.random_range(0.02..0.1),
                    r.random_range(-1.5..1.5),
                ))
            })
            .collect();
        gts.extend([GroundTruthInstance::NoObject; 2]);
        let preds: Vec<PredictedInstance> = (0..7)
            .map(|i| {
                let base = match gts[i % 5] {
                    GroundTruthInstance::Object(b) => b,
                    GroundTruthInstance::NoObject => unreachable!(),
                };
                let b = rb(
                    base.cx() + r.random_range(-0.05..0.05),
                    base.cy() + r.random_range(-0.05..0.05),
                    base.w() * r.random_range(0.8..1.2),
                    base.h() * r.random_range(0.8..1.2),
                    base.angle() + r.random_range(-0.2..0.2),
                );
                PredictedInstance::new(r.random_range(0.0..1.0), b).unwrap()
            })
            .collect();
        let a = match_sets(&gts, &preds, &w).unwrap();
        let cost: Vec<Vec<f64>> = gts.iter().map(|g| preds.iter().map(|p| pair_cost(g, p, &w)).collect()).collect();
        assert!((a.total_cost - brute_min_cost(&cost)).abs() < 1e-9);
    }
}

/// Straight-line recomputation of the set loss with its own formula.
fn loss_by_hand(gts: &[GroundTruthInstance], preds: &[PredictedInstance], pairs: &[(usize, usize)], w: &CostWeights) -> f64 {
    let mut total = 0.0;
    for &(g, p) in pairs {
        let q = preds[p].class_prob();
        match gts[g] {
            GroundTruthInstance::NoObject => total += -w.cls * (1.0 - q).max(1e-12).ln(),
            GroundTruthInstance::Object(b) => {
                let pb = preds[p].bbox;
                let l1 = (b.cx() - pb.cx()).abs() + (b.cy() - pb.cy()).abs() + (b.w() - pb.w()).abs() + (b.h() - pb.h()).abs();
                total += -w.cls * q.max(1e-12).ln()
                    + w.l1 * l1
                    + w.giou * (1.0 - giou(&b, &pb))
                    + w.angle * (1.0 - (pb.angle() - b.angle()).cos());
            }
        }
    }
    total
}

#[test]
fn set_loss_matches_straight_line_recomputation() {
    let mut r = common::rng(3);
    let w = CostWeights::default();
    for n in 1..=6 {
        let gts: Vec<GroundTruthInstance> = (0..n)
            .map(|i| {
                if i % 3 == 2 {
                    GroundTruthInstance::NoObject
                } else {
                    GroundTruthInstance::Object(rb(r.random_range(0.0..1.0), r.random_range(0.0..1.0), 0.2, 0.05, r.random_range(-1.0..1.0)))
                }
            })
            .collect();
        let preds: Vec<PredictedInstance> = (0..n)
            .map(|_| {
                PredictedInstance::new(
                    r.random_range(0.0..1.0),
                    rb(r.random_range(0.0..1.0), r.random_range(0.0..1.0), 0.15, 0.06, r.random_range(-1.0..1.0)),
                )
                .unwrap()
            })
            .collect();
        let a = match_sets(&gts, &preds, &w).unwrap();
        let got = set_loss(&gts, &preds, &a, &w).unwrap();
        assert!((got - loss_by_hand(&gts, &preds, &a.pairs, &w)).abs() < 1e-12);
    }
}

#[test]
fn set_loss_edge_cases() {
    let b = rb(0.5, 0.5, 0.2, 0.1, 0.4);
    let w = CostWeights::default();
    let p0 = PredictedInstance::new(0.0, b).unwrap();
    let a = match_sets(&[GroundTruthInstance::NoObject], &[p0], &w).unwrap();
    assert_eq!(set_loss(&[GroundTruthInstance::NoObject], &[p0], &a, &w).unwrap(), 0.0);
    // Saturated wrong prediction stays finite.
    let p1 = PredictedInstance::new(1.0, b).unwrap();
    let l = set_loss(&[GroundTruthInstance::NoObject], &[p1], &a, &w).unwrap();
    assert!(l.is_finite() && (l - 12.0 * 10f64.ln()).abs() < 1e-9);
    assert!(PredictedInstance::new(1.5, b).is_err());
}

#[test]
fn zero_weight_zeroes_its_column() {
    let gt = [GroundTruthInstance::Object(rb(0.5, 0.5, 0.2, 0.1, 0.0))];
    let pred = [PredictedInstance::new(0.6, rb(0.55, 0.52, 0.25, 0.08, 0.3)).unwrap()];
    for which in 0..4 {
        let mut w = [1.0, 5.0, 2.0, 2.0];
        w[which] = 0.0;
        let w = CostWeights::new(w[0], w[1], w[2], w[3]).unwrap();
        let a = match_sets(&gt, &pred, &w).unwrap();
        let t = set_loss_terms(&gt, &pred, &a, &w).unwrap();
        let cols = [t.cls, t.l1, t.giou, t.angle];
        assert_eq!(cols[which], 0.0);
        assert!(cols.iter().enumerate().all(|(i, &c)| i == which || c > 0.0));
    }
    assert!(CostWeights::new(-1.0, 1.0, 1.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn integer_optimum_exact(m in int_matrix()) {
        let a = hungarian(&as_f64(&m)).unwrap();
        prop_assert_eq!(a.total_cost, brute_min_cost_int(&m) as f64);
        let mut cols: Vec<usize> = a.pairs.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        prop_assert_eq!(cols, (0..m.len()).collect::<Vec<_>>());
    }

    #[test]
    fn real_optimum_within_tolerance(m in real_matrix()) {
        let a = hungarian(&m).unwrap();
        prop_assert!((a.total_cost - brute_min_cost(&m)).abs() < 1e-9);
        let direct: f64 = a.pairs.iter().map(|&(i, j)| m[i][j]).sum();
        prop_assert!((a.total_cost - direct).abs() < 1e-9);
    }

    #[test]
    fn permutation_equivariance(m in real_matrix(), seed in any::<u64>()) {
        let n = m.len();
        let perms = permutations(n);
        let mut r = common::rng(seed);
        let rp = &perms[r.random_range(0..perms.len())];
        let cp = &perms[r.random_range(0..perms.len())];
        let shuffled: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[rp[i]][cp[j]]).collect()).collect();
        let (a, b) = (hungarian(&m).unwrap(), hungarian(&shuffled).unwrap());
        prop_assert!((a.total_cost - b.total_cost).abs() < 1e-9);
        // Mapping b's pairs back gives an optimal permutation of the original.
        let back: f64 = b.pairs.iter().map(|&(i, j)| m[rp[i]][cp[j]]).sum();
        prop_assert!((back - a.total_cost).abs() < 1e-9);
    }

    #[test]
    fn row_shift_adds_constant(m in int_matrix(), row in 0usize..7, k in -20i64..20) {
        let row = row % m.len();
        let mut shifted = m.clone();
        for v in &mut shifted[row] {
            *v += k;
        }
        let (a, b) = (hungarian(&as_f64(&m)).unwrap(), hungarian(&as_f64(&shifted)).unwrap());
        prop_assert_eq!(b.total_cost, a.total_cost + k as f64);
    }

    #[test]
    fn angle_loss_properties(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let l = angle_loss(a, b);
        prop_assert!((0.0..=2.0).contains(&l));
        prop_assert!((l - angle_loss(a, b + 2.0 * PI)).abs() < 1e-12);
        prop_assert!((l - angle_loss(b, a)).abs() < 1e-15);
    }

    #[test]
    fn cost_dominance(cx in 0.2..0.8f64, cy in 0.2..0.8f64, w in 0.1..0.3f64, h in 0.02..0.1f64,
                      a in -1.0..1.0f64, p in 0.1..0.9f64, d in 0.01..0.05f64, da in 0.05..0.3f64) {
        let g = GroundTruthInstance::Object(rb(cx, cy, w, h, a));
        // P1: slightly displaced; P2: further displaced in position and
        // angle, lower probability.
        let p1 = PredictedInstance::new(p + 0.05, rb(cx + d, cy, w, h, a + da / 2.0)).unwrap();
        let p2 = PredictedInstance::new(p, rb(cx + 2.0 * d, cy, w, h, a + da)).unwrap();
        let wts = CostWeights::default();
        prop_assert!(pair_cost(&g, &p1, &wts) < pair_cost(&g, &p2, &wts));
    }

    #[test]
    fn perfect_predictions_have_no_loss(boxes in prop::collection::vec(
        (0.0..1.0f64, 0.0..1.0f64, 0.01..0.5f64, 0.01..0.5f64, -3.0..3.0f64), 1..12)) {
        let gts: Vec<_> = boxes.iter().map(|&(x, y, w, h, a)| GroundTruthInstance::Object(rb(x, y, w, h, a))).collect();
        let preds: Vec<_> = boxes.iter().map(|&(x, y, w, h, a)| PredictedInstance::new(1.0, rb(x, y, w, h, a)).unwrap()).collect();
        let w = CostWeights::default();
        let a = match_sets(&gts, &preds, &w).unwrap();
        prop_assert!((a.total_cost + gts.len() as f64 * w.cls).abs() < 1e-9);
        prop_assert!(set_loss(&gts, &preds, &a, &w).unwrap() <= 1e-11);
    }
}
