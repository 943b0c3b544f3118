//! Campaign filtering and item/system scoring.
//!
//! An item is one `(pair_id, system_id)` combination: the same source/target
//! pair rendered by one system and graded by several annotators.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::model::{Aspect, RatingRecord};

/// Annotators need at least this many ratings before a single-valued history
/// counts as flatlining.
pub const FLATLINE_MIN_RATINGS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemKey {
    pub pair_id: String,
    pub system_id: String,
}

impl ItemKey {
    pub fn of(r: &RatingRecord) -> Self {
        ItemKey {
            pair_id: r.pair_id.clone(),
            system_id: r.system_id.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    AudioIssue,
    SemanticMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub pair_id: String,
    pub system_id: String,
    pub reason: RemovalReason,
    pub n_annotations: usize,
    pub n_flagging: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub pair_id: String,
    pub system_id: String,
    pub aspect: Aspect,
    pub score: f64,
    pub n_ratings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemScore {
    pub system_id: String,
    pub aspect: Aspect,
    pub mean: f64,
    pub n_items: usize,
}

fn group_by_item(records: &[RatingRecord]) -> BTreeMap<ItemKey, Vec<&RatingRecord>> {
    let mut out: BTreeMap<ItemKey, Vec<&RatingRecord>> = BTreeMap::new();
    for r in records {
        out.entry(ItemKey::of(r)).or_default().push(r);
    }
    out
}

/// Drops items where any annotator reported an audio issue, or where a strict
/// majority of annotators rated meaning as 1. Audio issues take precedence
/// when both apply.
pub fn filter_records(records: &[RatingRecord]) -> (Vec<RatingRecord>, Vec<Removal>) {
    let mut removed: BTreeMap<ItemKey, Removal> = BTreeMap::new();
    for (key, recs) in group_by_item(records) {
        let n = recs.len();
        let audio = recs.iter().filter(|r| r.audio_issue).count();
        let mismatch = recs
            .iter()
            .filter(|r| r.rating(Aspect::Meaning) == Some(1))
            .count();
        let reason = if audio > 0 {
            Some((RemovalReason::AudioIssue, audio))
        } else if 2 * mismatch > n {
            Some((RemovalReason::SemanticMismatch, mismatch))
        } else {
            None
        };
        if let Some((reason, n_flagging)) = reason {
            removed.insert(
                key.clone(),
                Removal {
                    pair_id: key.pair_id,
                    system_id: key.system_id,
                    reason,
                    n_annotations: n,
                    n_flagging,
                },
            );
        }
    }
    let kept = records
        .iter()
        .filter(|r| !removed.contains_key(&ItemKey::of(r)))
        .cloned()
        .collect();
    (kept, removed.into_values().collect())
}

/// Annotators with at least [`FLATLINE_MIN_RATINGS`] ratings that all share
/// one value.
pub fn flatline_annotators(records: &[RatingRecord]) -> Vec<String> {
    let mut seen: BTreeMap<&str, (usize, BTreeSet<u8>)> = BTreeMap::new();
    for r in records {
        let e = seen.entry(&r.annotator_id).or_default();
        for &v in r.ratings.values() {
            e.0 += 1;
            e.1.insert(v);
        }
    }
    seen.into_iter()
        .filter(|(_, (n, values))| *n >= FLATLINE_MIN_RATINGS && values.len() == 1)
        .map(|(a, _)| a.to_string())
        .collect()
}

/// Median; the midpoint of the two middle values for even counts.
pub fn item_score(ratings: &[u8]) -> Result<f64, StatsError> {
    if ratings.is_empty() {
        return Err(StatsError::EmptyRatings);
    }
    let mut v = ratings.to_vec();
    v.sort_unstable();
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    })
}

/// Item scores for every aspect that received at least one rating.
pub fn item_scores(records: &[RatingRecord]) -> Vec<ItemScore> {
    let mut out = Vec::new();
    for (key, recs) in group_by_item(records) {
        for aspect in Aspect::ORDER {
            let ratings: Vec<u8> = recs.iter().filter_map(|r| r.rating(aspect)).collect();
            if let Ok(score) = item_score(&ratings) {
                out.push(ItemScore {
                    pair_id: key.pair_id.clone(),
                    system_id: key.system_id.clone(),
                    aspect,
                    score,
                    n_ratings: ratings.len(),
                });
            }
        }
    }
    out
}

pub fn system_score(items: &[ItemScore], system_id: &str, aspect: Aspect) -> Result<SystemScore, StatsError> {
    let scores: Vec<f64> = items
        .iter()
        .filter(|i| i.system_id == system_id && i.aspect == aspect)
        .map(|i| i.score)
        .collect();
    if scores.is_empty() {
        return Err(StatsError::NoItems {
            system_id: system_id.to_string(),
            aspect,
        });
    }
    Ok(SystemScore {
        system_id: system_id.to_string(),
        aspect,
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        n_items: scores.len(),
    })
}

/// Every `(system, aspect)` with at least one item, ordered by system then
/// aspect.
pub fn system_scores(items: &[ItemScore]) -> Vec<SystemScore> {
    let keys: BTreeSet<(&str, Aspect)> = items
        .iter()
        .map(|i| (i.system_id.as_str(), i.aspect))
        .collect();
    keys.into_iter()
        .filter_map(|(s, a)| system_score(items, s, a).ok())
        .collect()
}
