use std::collections::{BTreeMap, BTreeSet};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use prosync_core::model::{Aspect, RatingRecord};
use prosync_core::stats::*;

/// Two-sided p by walking every sign assignment of the average ranks.
fn brute_force_p(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let rank_of = |v: f64| {
        let lo = abs.iter().filter(|a| **a < v).count();
        let eq = abs.iter().filter(|a| **a == v).count();
        lo as f64 + (eq as f64 + 1.0) / 2.0
    };
    let ranks: Vec<f64> = d.iter().map(|v| rank_of(v.abs())).collect();
    let total: f64 = ranks.iter().sum();
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let w = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if s <= w + 1e-9 {
            hits += 1;
        }
    }
    (w, (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0))
}

fn paired(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| {
        (
            prop::collection::vec(1u8..=4, n),
            prop::collection::vec(1u8..=4, n),
            prop::collection::vec(0u8..=1, n),
        )
    })
    .prop_map(|(a, b, half)| {
        // Item scores are medians, so they land on a half-point grid with ties.
        let x = a
            .iter()
            .zip(&half)
            .map(|(&v, &h)| if v < 4 && h == 1 { v as f64 + 0.5 } else { v as f64 })
            .collect();
        let y = b.iter().map(|v| *v as f64).collect();
        (x, y)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn exact_matches_enumeration((x, y) in paired(1..=12)) {
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        let (w, p) = brute_force_p(&x, &y);
        prop_assert_eq!(r.w_statistic, w);
        prop_assert!((r.p_two_sided - p).abs() <= 1e-12, "{} vs {}", r.p_two_sided, p);
    }

    #[test]
    fn symmetric_and_shift_invariant((x, y) in paired(1..=30), shift in -3.0f64..3.0) {
        let base = wilcoxon_signed_rank(&x, &y).unwrap();
        let swapped = wilcoxon_signed_rank(&y, &x).unwrap();
        prop_assert_eq!(base.p_two_sided, swapped.p_two_sided);
        prop_assert_eq!(base.w_statistic, swapped.w_statistic);
        let xs: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let shifted = wilcoxon_signed_rank(&xs, &ys).unwrap();
        prop_assert_eq!(base.n_effective, shifted.n_effective);
        prop_assert!((base.p_two_sided - shifted.p_two_sided).abs() < 1e-12);
    }

    #[test]
    fn bonferroni_bounds(ps in prop::collection::vec(0.0f64..=1.0, 0..20)) {
        let adj = bonferroni(&ps).unwrap();
        for (a, p) in adj.iter().zip(&ps) {
            prop_assert!((0.0..=1.0).contains(a));
            prop_assert!(a >= p);
        }
    }

    #[test]
    fn item_score_permutation_invariant(mut r in prop::collection::vec(1u8..=4, 1..9), seed in any::<u64>()) {
        let s = item_score(&r).unwrap();
        prop_assert!((1.0..=4.0).contains(&s));
        let n = r.len();
        r.rotate_left((seed as usize) % n);
        r.reverse();
        prop_assert_eq!(item_score(&r).unwrap(), s);
    }

    #[test]
    fn pearson_matches_textbook(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 20)) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let n = xs.len() as f64;
        let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let sxx: f64 = xs.iter().map(|a| a * a).sum();
        let syy: f64 = ys.iter().map(|b| b * b).sum();
        let oracle = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        prop_assert!((pearson(&xs, &ys).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn overlap_cdf_properties(pairs in prop::collection::vec(
        (prop::collection::btree_set(0u8..6, 1..4), prop::collection::btree_set(0u8..6, 1..4)), 0..40)
    ) {
        let as_sets: Vec<(LabelSet, LabelSet)> = pairs
            .iter()
            .map(|(a, b)| (
                a.iter().map(|v| format!("l{v}")).collect(),
                b.iter().map(|v| format!("l{v}")).collect(),
            ))
            .collect();
        let c = overlap_cdf(&as_sets);
        prop_assert_eq!(c[0], pairs.len());
        prop_assert!(c.windows(2).all(|w| w[0] >= w[1]));
        for (k, ck) in c.iter().enumerate() {
            let brute = pairs.iter().filter(|(a, b)| a.intersection(b).count() >= k).count();
            prop_assert_eq!(*ck, brute);
        }
    }

    #[test]
    fn system_mean_matches_accumulation(scores in prop::collection::vec(2u8..=8, 1..50)) {
        let items: Vec<ItemScore> = scores
            .iter()
            .enumerate()
            .map(|(i, s)| ItemScore {
                pair_id: format!("p{i}"),
                system_id: "s".into(),
                aspect: Aspect::Rhythm,
                score: *s as f64 / 2.0,
                n_ratings: 5,
            })
            .collect();
        let mut acc = 0.0;
        for i in &items {
            acc += i.score;
        }
        let got = system_score(&items, "s", Aspect::Rhythm).unwrap();
        prop_assert!((got.mean - acc / items.len() as f64).abs() < 1e-12);
        prop_assert!((1.0..=4.0).contains(&got.mean));
    }

    #[test]
    fn flatliner_removal_spares_unrated_pairs(
        votes in prop::collection::vec(prop::collection::vec(1u8..=4, 3..6), 2..8),
    ) {
        let mut recs = Vec::new();
        for (p, vs) in votes.iter().enumerate() {
            for (a, v) in vs.iter().enumerate() {
                recs.push(rating(&format!("p{p}"), &format!("a{a}"), *v));
            }
        }
        // The flatliner rates only the first pair, repeatedly across systems.
        for s in 0..12 {
            let mut r = rating("p0", "flat", 1);
            r.system_id = format!("sys{s}");
            recs.push(r);
        }
        prop_assert_eq!(flatline_annotators(&recs), vec!["flat".to_string()]);
        let without: Vec<RatingRecord> = recs.iter().filter(|r| r.annotator_id != "flat").cloned().collect();
        let survivors = |rs: &[RatingRecord]| -> BTreeSet<String> {
            filter_records(rs).0.into_iter().filter(|r| r.pair_id != "p0").map(|r| r.pair_id).collect()
        };
        prop_assert_eq!(survivors(&recs), survivors(&without));
    }
}

fn rating(pair: &str, annotator: &str, meaning: u8) -> RatingRecord {
    let mut ratings = BTreeMap::new();
    ratings.insert(Aspect::Meaning, meaning);
    RatingRecord {
        pair_id: pair.into(),
        annotator_id: annotator.into(),
        system_id: "sys".into(),
        audio_issue: false,
        ratings,
    }
}

/// Every tie-free n = 20 configuration, one per attainable W. The continuity
/// corrected normal curve stays within 0.005 of the exact p in the tail
/// (exact p < 0.2) but drifts up to about 0.0083 near the centre (W = 84).
#[test]
fn normal_approximation_against_exact_at_twenty() {
    let mut tail_worst: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for w in 0..=105u32 {
        // Negative signs on a subset of ranks 1..=20 summing to w.
        let mut neg = vec![false; 21];
        let mut left = w;
        for r in (1..=20u32).rev() {
            if r <= left {
                neg[r as usize] = true;
                left -= r;
            }
        }
        let x: Vec<f64> = (1..=20).map(|r| if neg[r] { -(r as f64) } else { r as f64 }).collect();
        let y = vec![0.0; 20];
        let exact = wilcoxon_signed_rank_with(&x, &y, MethodChoice::Exact).unwrap();
        let normal = wilcoxon_signed_rank_with(&x, &y, MethodChoice::Normal).unwrap();
        assert_eq!(exact.w_statistic, w as f64);
        let gap = (exact.p_two_sided - normal.p_two_sided).abs();
        worst = worst.max(gap);
        if exact.p_two_sided < 0.2 {
            tail_worst = tail_worst.max(gap);
        }
    }
    assert!(tail_worst <= 0.005, "tail gap {tail_worst}");
    assert!((0.0082..0.0084).contains(&worst), "centre gap {worst}");
}

#[test]
fn worked_example_all_minus_one() {
    let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    assert_eq!((r.w_statistic, r.p_two_sided), (0.0, 0.0625));
}

/// Agreeing-sample counts out of 400 per one-second group, chosen so that
/// the group proportions correlate with duration at exactly r = -0.61:
/// sum((d - 5.5) k) = -2013 and 10 sum(k^2) - (sum k)^2 = 1_320_000.
pub const AGREEING_OF_400: [usize; 10] = [281, 395, 281, 333, 390, 64, 130, 175, 78, 243];

#[test]
fn duration_agreement_recovers_minus_061() {
    let mut samples = Vec::new();
    for (g, &k) in AGREEING_OF_400.iter().enumerate() {
        let d = (g + 1) as f64;
        for i in 0..400 {
            // Durations spread within +-0.4 s of the group centre.
            let jitter = (i % 9) as f64 * 0.1 - 0.4;
            let ratings = if i < k { vec![3, 3, 3, 1, 2] } else { vec![3, 3, 2, 2, 1] };
            samples.push(AgreementSample { duration_s: d + jitter, ratings });
        }
    }
    let out = duration_agreement(&samples).unwrap();
    assert_eq!(out.groups.len(), 10);
    for (g, &k) in out.groups.iter().zip(&AGREEING_OF_400) {
        assert_eq!(g.n_samples, 400);
        assert_eq!(g.n_agreeing, k);
        assert_eq!(g.agreement, k as f64 / 400.0);
    }
    assert_abs_diff_eq!(out.pearson_r, -0.61, epsilon = 1e-9);
}

#[test]
fn emotion_stats_hand_arithmetic() {
    let set = |ls: &[&str]| ls.iter().map(|s| s.to_string()).collect::<LabelSet>();
    let mut m = BTreeMap::new();
    m.insert("en".to_string(), vec![set(&["a"]), set(&["a", "b"]), set(&["a", "b", "c"])]);
    let s = top_label_stats(&m);
    assert_eq!(s["en"].mean, 2.0);
    assert_abs_diff_eq!(s["en"].std, (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
}
