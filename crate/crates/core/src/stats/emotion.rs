//! Emotion-label analytics: per-example top labels, their count statistics
//! per language, and cross-language top-label overlap.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::model::EmotionAnnotation;

pub type LabelSet = BTreeSet<String>;

/// Labels receiving the most votes; each annotator votes once per label.
pub fn emotion_top_labels(annotations: &[EmotionAnnotation]) -> Result<LabelSet, StatsError> {
    let first = annotations
        .first()
        .ok_or_else(|| StatsError::InconsistentExample("no annotations".into()))?;
    if let Some(other) = annotations
        .iter()
        .find(|a| a.example_id != first.example_id || a.language != first.language)
    {
        return Err(StatsError::InconsistentExample(format!(
            "{}/{} mixed with {}/{}",
            first.example_id, first.language, other.example_id, other.language
        )));
    }
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for a in annotations {
        for l in &a.labels {
            *votes.entry(l).or_default() += 1;
        }
    }
    let max = votes.values().copied().max().unwrap_or(0);
    Ok(votes
        .into_iter()
        .filter(|(_, v)| *v == max && max > 0)
        .map(|(l, _)| l.to_string())
        .collect())
}

/// Top labels per `(language, example_id)`.
pub fn top_labels_by_example(
    annotations: &[EmotionAnnotation],
) -> Result<BTreeMap<(String, String), LabelSet>, StatsError> {
    let mut grouped: BTreeMap<(String, String), Vec<EmotionAnnotation>> = BTreeMap::new();
    for a in annotations {
        grouped
            .entry((a.language.clone(), a.example_id.clone()))
            .or_default()
            .push(a.clone());
    }
    grouped
        .into_iter()
        .map(|(k, v)| emotion_top_labels(&v).map(|top| (k, top)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopLabelStats {
    pub mean: f64,
    pub std: f64,
    pub n_examples: usize,
}

/// Mean and population standard deviation of top-set sizes per language.
pub fn top_label_stats(
    by_language: &BTreeMap<String, Vec<LabelSet>>,
) -> BTreeMap<String, TopLabelStats> {
    by_language
        .iter()
        .filter(|(_, sets)| !sets.is_empty())
        .map(|(lang, sets)| {
            let n = sets.len() as f64;
            let sizes: Vec<f64> = sets.iter().map(|s| s.len() as f64).collect();
            let mean = sizes.iter().sum::<f64>() / n;
            let var = sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
            (
                lang.clone(),
                TopLabelStats {
                    mean,
                    std: var.sqrt(),
                    n_examples: sets.len(),
                },
            )
        })
        .collect()
}

/// `c[k]` = number of pairs whose top sets share at least `k` labels, for
/// `k = 0 ..= max_overlap + 1` (so the table ends with a zero). Empty input
/// gives `[0]`.
pub fn overlap_cdf(pairs: &[(LabelSet, LabelSet)]) -> Vec<usize> {
    if pairs.is_empty() {
        return vec![0];
    }
    let overlaps: Vec<usize> = pairs
        .iter()
        .map(|(a, b)| a.intersection(b).count())
        .collect();
    let max = overlaps.iter().copied().max().unwrap_or(0);
    (0..=max + 1)
        .map(|k| overlaps.iter().filter(|&&o| o >= k).count())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionReport {
    pub top_label_stats: BTreeMap<String, TopLabelStats>,
    pub language_a: String,
    pub language_b: String,
    pub n_pairs: usize,
    pub overlap_cdf: Vec<usize>,
}

/// Full analysis; examples are paired across languages by `example_id`.
pub fn emotion_report(
    annotations: &[EmotionAnnotation],
    language_a: &str,
    language_b: &str,
) -> Result<EmotionReport, StatsError> {
    let tops = top_labels_by_example(annotations)?;
    let mut by_language: BTreeMap<String, Vec<LabelSet>> = BTreeMap::new();
    for ((lang, _), set) in &tops {
        by_language.entry(lang.clone()).or_default().push(set.clone());
    }
    let pairs: Vec<(LabelSet, LabelSet)> = tops
        .iter()
        .filter(|((lang, _), _)| lang == language_a)
        .filter_map(|((_, id), a)| {
            tops.get(&(language_b.to_string(), id.clone()))
                .map(|b| (a.clone(), b.clone()))
        })
        .collect();
    Ok(EmotionReport {
        top_label_stats: top_label_stats(&by_language),
        language_a: language_a.to_string(),
        language_b: language_b.to_string(),
        n_pairs: pairs.len(),
        overlap_cdf: overlap_cdf(&pairs),
    })
}
