use super::PitchError;

/// Fills gaps in a per-word F0 sequence.
///
/// Interior gaps use a cubic Hermite (Catmull-Rom style) curve through the
/// known values, indexed by list position. Tangents at known points are
/// central differences over their known neighbours and one-sided at the
/// first/last known point, so with only two known values the curve is the
/// straight line between them. Leading and trailing gaps copy the nearest
/// known value.
pub fn interpolate_missing(values: &[Option<f64>]) -> Result<Vec<f64>, PitchError> {
    let known: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
        .collect();
    let (first, last) = match (known.first(), known.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(PitchError::AllMissing),
    };

    let tangent = |k: usize| -> f64 {
        if known.len() < 2 {
            return 0.0;
        }
        let (lo, hi) = (k.saturating_sub(1), (k + 1).min(known.len() - 1));
        (known[hi].1 - known[lo].1) / (known[hi].0 - known[lo].0)
    };

    let mut out = Vec::with_capacity(values.len());
    let mut seg = 0;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            out.push(*v);
            continue;
        }
        let x = i as f64;
        if x < first.0 {
            out.push(first.1);
        } else if x > last.0 {
            out.push(last.1);
        } else {
            while known[seg + 1].0 < x {
                seg += 1;
            }
            let (x0, y0) = known[seg];
            let (x1, y1) = known[seg + 1];
            let h = x1 - x0;
            let t = (x - x0) / h;
            let (m0, m1) = (tangent(seg) * h, tangent(seg + 1) * h);
            let t2 = t * t;
            let t3 = t2 * t;
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            out.push(h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_point_gap_is_linear() {
        let out = interpolate_missing(&[Some(200.0), None, Some(240.0)]).unwrap();
        assert_eq!(out[0], 200.0);
        assert_abs_diff_eq!(out[1], 220.0, epsilon = 1e-12);
        assert_eq!(out[2], 240.0);
    }

    #[test]
    fn leading_gap_takes_nearest() {
        assert_eq!(
            interpolate_missing(&[None, Some(200.0), Some(240.0)]).unwrap(),
            vec![200.0, 200.0, 240.0]
        );
        assert_eq!(
            interpolate_missing(&[Some(200.0), Some(240.0), None, None]).unwrap(),
            vec![200.0, 240.0, 240.0, 240.0]
        );
    }

    #[test]
    fn all_present_unchanged() {
        let v = [Some(1.0), Some(5.0), Some(2.0)];
        assert_eq!(interpolate_missing(&v).unwrap(), vec![1.0, 5.0, 2.0]);
    }

    #[test]
    fn all_missing_is_an_error() {
        assert!(matches!(interpolate_missing(&[None, None]), Err(PitchError::AllMissing)));
        assert!(matches!(interpolate_missing(&[]), Err(PitchError::AllMissing)));
    }

    #[test]
    fn single_known_value_fills_everything() {
        assert_eq!(
            interpolate_missing(&[None, Some(3.0), None]).unwrap(),
            vec![3.0, 3.0, 3.0]
        );
    }

    #[test]
    fn interior_gap_uses_central_tangents() {
        // Known at x = 0, 1, 3, 4; the gap at x = 2 is the midpoint of the
        // segment [1, 3], where the Hermite weights are 1/2, 1/8, 1/2, -1/8.
        let vals = [Some(0.0), Some(1.0), None, Some(4.0), Some(9.0)];
        let out = interpolate_missing(&vals).unwrap();
        let h = 2.0;
        let m0 = (4.0 - 0.0) / 3.0 * h;
        let m1 = (9.0 - 1.0) / 3.0 * h;
        let expected = 0.5 * 1.0 + 0.125 * m0 + 0.5 * 4.0 - 0.125 * m1;
        assert_abs_diff_eq!(out[2], expected, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn known_values_preserved(vals in prop::collection::vec(prop::option::of(50.0f64..500.0), 1..30)) {
            prop_assume!(vals.iter().any(Option::is_some));
            let out = interpolate_missing(&vals).unwrap();
            prop_assert_eq!(out.len(), vals.len());
            for (o, v) in out.iter().zip(&vals) {
                if let Some(v) = v {
                    prop_assert_eq!(o, v);
                }
            }
        }

        #[test]
        fn two_known_values_bound_the_output(
            len in 2usize..20,
            a in 50.0f64..500.0,
            b in 50.0f64..500.0,
            i in 0usize..20,
            j in 0usize..20,
        ) {
            let (i, j) = (i % len, j % len);
            prop_assume!(i != j);
            let mut vals = vec![None; len];
            vals[i] = Some(a);
            vals[j] = Some(b);
            let out = interpolate_missing(&vals).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            for o in out {
                prop_assert!(o >= lo - 1e-9 && o <= hi + 1e-9);
            }
        }
    }
}
