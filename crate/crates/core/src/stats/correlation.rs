//! Pearson correlation and the duration/agreement analysis built on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StatsError;

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewPoints(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// One rated sample: its audio duration and every annotator's rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSample {
    pub duration_s: f64,
    pub ratings: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementGroup {
    /// Duration rounded to the nearest whole second.
    pub duration_s: i64,
    pub n_samples: usize,
    pub n_agreeing: usize,
    pub agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationAgreement {
    pub groups: Vec<AgreementGroup>,
    pub pearson_r: f64,
}

/// True when more than half of the ratings share one value.
pub fn has_majority(ratings: &[u8]) -> bool {
    let mut counts = [0usize; 256];
    for &r in ratings {
        counts[r as usize] += 1;
    }
    counts.iter().any(|&c| 2 * c > ratings.len())
}

/// Groups samples by rounded duration, computes the share of samples with a
/// strict-majority rating in each group, and correlates that share with the
/// group duration. Samples without ratings are ignored.
pub fn duration_agreement(samples: &[AgreementSample]) -> Result<DurationAgreement, StatsError> {
    let mut groups: BTreeMap<i64, (usize, usize)> = BTreeMap::new();
    for s in samples.iter().filter(|s| !s.ratings.is_empty()) {
        let g = groups.entry(s.duration_s.round() as i64).or_default();
        g.0 += 1;
        if has_majority(&s.ratings) {
            g.1 += 1;
        }
    }
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    let groups: Vec<AgreementGroup> = groups
        .into_iter()
        .map(|(duration_s, (n_samples, n_agreeing))| AgreementGroup {
            duration_s,
            n_samples,
            n_agreeing,
            agreement: n_agreeing as f64 / n_samples as f64,
        })
        .collect();
    let xs: Vec<f64> = groups.iter().map(|g| g.duration_s as f64).collect();
    let ys: Vec<f64> = groups.iter().map(|g| g.agreement).collect();
    let pearson_r = pearson(&xs, &ys)?;
    Ok(DurationAgreement { groups, pearson_r })
}
