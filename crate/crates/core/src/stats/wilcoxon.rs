//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped, absolute differences get average ranks on
//! ties, and the statistic is `W = min(W+, W-)`. Up to [`EXACT_MAX_N`]
//! non-zero pairs the two-sided p-value is exact: the null distribution of
//! `W+` over all `2^n` sign assignments is counted (ties included) by a
//! subset-sum table over doubled ranks. Above that the normal approximation
//! with tie-corrected variance and a 0.5 continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::StatsError;

/// Largest effective sample size evaluated exactly.
pub const EXACT_MAX_N: usize = 25;

/// Differences within this fraction of the data scale count as zero or tied.
const TIE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w_statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_two_sided: f64,
    pub n_effective: usize,
    pub method: WilcoxonMethod,
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, StatsError> {
    wilcoxon_signed_rank_with(x, y, MethodChoice::Auto)
}

/// Absolute differences with their signs, zeros removed, sorted by magnitude.
fn signed_differences(x: &[f64], y: &[f64]) -> (Vec<(f64, bool)>, f64) {
    let scale = x
        .iter()
        .chain(y)
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let eps = TIE_EPS * scale;
    let mut d: Vec<(f64, bool)> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| d.abs() > eps)
        .map(|d| (d.abs(), d > 0.0))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    (d, eps)
}

/// Doubled average ranks (always integers) and tie-group sizes.
fn doubled_ranks(sorted_abs: &[f64], eps: f64) -> (Vec<u64>, Vec<usize>) {
    let n = sorted_abs.len();
    let mut ranks = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && sorted_abs[j] - sorted_abs[j - 1] <= eps {
            j += 1;
        }
        // Ranks i+1..=j averaged, doubled: (i + 1 + j).
        let r2 = (i + 1 + j) as u64;
        ranks[i..j].fill(r2);
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of sign assignments whose doubled `W+` is at most `bound`.
fn exact_count_at_most(ranks: &[u64], bound: u64) -> f64 {
    let total: u64 = ranks.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts[..=(bound as usize).min(total as usize)]
        .iter()
        .map(|&c| c as f64)
        .sum()
}

pub fn wilcoxon_signed_rank_with(
    x: &[f64],
    y: &[f64],
    method: MethodChoice,
) -> Result<WilcoxonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (diffs, eps) = signed_differences(x, y);
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.0).collect();
    let (ranks2, ties) = doubled_ranks(&abs, eps);

    let w_plus2: u64 = diffs
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| d.1)
        .map(|(_, r)| *r)
        .sum();
    let total2: u64 = ranks2.iter().sum();
    let w_minus2 = total2 - w_plus2;
    let w2 = w_plus2.min(w_minus2);

    let method = match method {
        MethodChoice::Exact => WilcoxonMethod::Exact,
        MethodChoice::Normal => WilcoxonMethod::Normal,
        MethodChoice::Auto if n <= EXACT_MAX_N => WilcoxonMethod::Exact,
        MethodChoice::Auto => WilcoxonMethod::Normal,
    };

    let w = w2 as f64 / 2.0;
    let p = if n == 0 {
        1.0
    } else {
        match method {
            WilcoxonMethod::Exact => {
                let count = exact_count_at_most(&ranks2, w2);
                (2.0 * count / 2f64.powi(n as i32)).min(1.0)
            }
            WilcoxonMethod::Normal => {
                let nf = n as f64;
                let mean = nf * (nf + 1.0) / 4.0;
                let tie_term: f64 = ties
                    .iter()
                    .map(|&t| {
                        let t = t as f64;
                        t * t * t - t
                    })
                    .sum::<f64>()
                    / 48.0;
                let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
                if var <= 0.0 {
                    1.0
                } else {
                    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
                    erfc(z / std::f64::consts::SQRT_2).min(1.0)
                }
            }
        }
    };

    Ok(WilcoxonResult {
        w_statistic: w,
        w_plus: w_plus2 as f64 / 2.0,
        w_minus: w_minus2 as f64 / 2.0,
        p_two_sided: p,
        n_effective: n,
        method,
    })
}

/// `min(1, p * m)` for a family of `m` tests.
pub fn bonferroni(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::InvalidProbability(bad));
    }
    let m = p_values.len() as f64;
    Ok(p_values.iter().map(|p| (p * m).min(1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_samples() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.n_effective, 0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn all_differences_minus_one() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.w_statistic, 0.0);
        assert_eq!(r.w_minus, 15.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.p_two_sided, 0.0625);
    }

    #[test]
    fn tie_free_small_case() {
        // d = [1, -2, 3, 4]: W+ = 1 + 3 + 4 = 8, W- = 2, W = 2.
        // Sign assignments with W+ <= 2 over ranks {1,2,3,4}: {}, {1}, {2} -> 3.
        let r = wilcoxon_signed_rank(&[1.0, 0.0, 3.0, 4.0], &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.w_statistic, 2.0);
        assert_abs_diff_eq!(r.p_two_sided, 2.0 * 3.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn normal_branch_above_crossover() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 1.01).collect();
        let y: Vec<f64> = (0..40).map(|i| i as f64 + if i % 3 == 0 { 0.7 } else { -0.2 }).collect();
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Normal);
        assert!((0.0..=1.0).contains(&r.p_two_sided));
    }

    #[test]
    fn doubled_ranks_average_ties() {
        let (r, ties) = doubled_ranks(&[1.0, 2.0, 2.0, 3.0], 0.0);
        assert_eq!(r, vec![2, 5, 5, 8]);
        assert_eq!(ties, vec![2]);
    }

    #[test]
    fn bonferroni_examples() {
        let adj = bonferroni(&[0.01, 0.20]).unwrap();
        assert_abs_diff_eq!(adj[0], 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(adj[1], 0.40, epsilon = 1e-15);
        assert_eq!(bonferroni(&[0.7, 0.8]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(bonferroni(&[0.05]).unwrap(), vec![0.05]);
        assert!(bonferroni(&[]).unwrap().is_empty());
        assert!(bonferroni(&[1.5]).is_err());
    }
}
