//! Manifest curation: quality and gender filters plus similarity and
//! pitch-variability orderings. Filters keep input order, so any chain of
//! them is idempotent and order-independent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{parse_jsonl, write_jsonl, Gender, JsonlParse, ManifestEntry};
use crate::model::F0Contour;
use crate::pitch::pitch_variability;

pub const DEFAULT_MIN_MOS: f64 = 4.0;

#[derive(Debug, Error, PartialEq)]
pub enum CurationError {
    #[error("pair {0} has no source cosine similarity")]
    MissingSimilarity(String),
    #[error("pair {0} has no source contour")]
    MissingContour(String),
}

/// A source utterance and its translation in another language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub pair_id: String,
    pub src: ManifestEntry,
    pub tgt: ManifestEntry,
}

impl PairEntry {
    pub fn check(&self) -> Result<(), String> {
        self.src.check().map_err(|e| format!("src: {e}"))?;
        self.tgt.check().map_err(|e| format!("tgt: {e}"))?;
        if self.src.language == self.tgt.language {
            return Err(format!("src and tgt share language {}", self.src.language));
        }
        Ok(())
    }
}

pub fn parse_pairs(text: &str) -> JsonlParse<PairEntry> {
    parse_jsonl(text, PairEntry::check)
}

pub fn write_pairs(pairs: &[PairEntry]) -> String {
    write_jsonl(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MosFilter<T> {
    pub kept: Vec<T>,
    /// Entries dropped because they carry no MOS at all.
    pub missing_mos: Vec<T>,
}

impl<T> Default for MosFilter<T> {
    fn default() -> Self {
        MosFilter {
            kept: Vec::new(),
            missing_mos: Vec::new(),
        }
    }
}

/// Keeps entries with `mos >= threshold`; entries without a MOS are dropped
/// and reported separately.
pub fn filter_by_mos(entries: &[ManifestEntry], threshold: f64) -> MosFilter<ManifestEntry> {
    let mut out = MosFilter::default();
    for e in entries {
        match e.mos {
            Some(m) if m >= threshold => out.kept.push(e.clone()),
            Some(_) => {}
            None => out.missing_mos.push(e.clone()),
        }
    }
    out
}

/// Pair version of [`filter_by_mos`]: both sides must pass.
pub fn filter_pairs_by_mos(pairs: &[PairEntry], threshold: f64) -> MosFilter<PairEntry> {
    let mut out = MosFilter::default();
    for p in pairs {
        match (p.src.mos, p.tgt.mos) {
            (Some(a), Some(b)) if a >= threshold && b >= threshold => out.kept.push(p.clone()),
            (Some(_), Some(_)) => {}
            _ => out.missing_mos.push(p.clone()),
        }
    }
    out
}

pub fn match_gender(pairs: &[PairEntry]) -> Vec<PairEntry> {
    pairs
        .iter()
        .filter(|p| p.src.gender == p.tgt.gender && p.src.gender != Gender::Unknown)
        .cloned()
        .collect()
}

/// Stable sort by source cosine similarity, highest first.
pub fn rank_by_similarity(pairs: &[PairEntry]) -> Result<Vec<PairEntry>, CurationError> {
    let mut keyed = pairs
        .iter()
        .map(|p| {
            p.src
                .cosine_similarity
                .map(|s| (s, p.clone()))
                .ok_or_else(|| CurationError::MissingSimilarity(p.pair_id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}

/// Pitch variability per pair; a source without voiced frames scores 0.
pub fn pitch_variabilities(
    pairs: &[PairEntry],
    contours: &BTreeMap<String, F0Contour>,
) -> Result<Vec<f64>, CurationError> {
    pairs
        .iter()
        .map(|p| {
            contours
                .get(&p.pair_id)
                .map(|c| pitch_variability(c).unwrap_or(0.0))
                .ok_or_else(|| CurationError::MissingContour(p.pair_id.clone()))
        })
        .collect()
}

/// Stable sort by source pitch variability, highest first. `contours` is
/// keyed by `pair_id`.
pub fn rank_by_pitch_variability(
    pairs: &[PairEntry],
    contours: &BTreeMap<String, F0Contour>,
) -> Result<Vec<PairEntry>, CurationError> {
    let vars = pitch_variabilities(pairs, contours)?;
    let mut keyed: Vec<(f64, PairEntry)> = vars.into_iter().zip(pairs.iter().cloned()).collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, lang: &str, gender: Gender, mos: Option<f64>) -> ManifestEntry {
        ManifestEntry {
            id: id.into(),
            audio_path: format!("{id}.wav"),
            language: lang.into(),
            gender,
            mos,
            cosine_similarity: None,
            duration_s: 2.0,
            provenance: BTreeMap::new(),
        }
    }

    fn pair(id: &str, g_src: Gender, g_tgt: Gender, sim: Option<f64>) -> PairEntry {
        let mut src = entry(&format!("{id}-es"), "es", g_src, Some(4.5));
        src.cosine_similarity = sim;
        PairEntry {
            pair_id: id.into(),
            src,
            tgt: entry(&format!("{id}-en"), "en", g_tgt, Some(4.5)),
        }
    }

    #[test]
    fn mos_boundary_survives() {
        let es: Vec<_> = [4.2, 3.9, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &m)| entry(&i.to_string(), "en", Gender::Male, Some(m)))
            .collect();
        let kept: Vec<f64> = filter_by_mos(&es, DEFAULT_MIN_MOS)
            .kept
            .iter()
            .map(|e| e.mos.unwrap())
            .collect();
        assert_eq!(kept, vec![4.2, 4.0]);
        assert_eq!(filter_by_mos(&es, 1.0).kept.len(), 3);
    }

    #[test]
    fn missing_mos_reported() {
        let es = vec![entry("a", "en", Gender::Male, None), entry("b", "en", Gender::Male, None)];
        let out = filter_by_mos(&es, DEFAULT_MIN_MOS);
        assert!(out.kept.is_empty());
        assert_eq!(out.missing_mos.len(), 2);
    }

    #[test]
    fn pair_mos_needs_both_sides() {
        let mut p = pair("p", Gender::Male, Gender::Male, None);
        p.tgt.mos = Some(3.5);
        assert!(filter_pairs_by_mos(&[p.clone()], 4.0).kept.is_empty());
        p.tgt.mos = None;
        assert_eq!(filter_pairs_by_mos(&[p], 4.0).missing_mos.len(), 1);
    }

    #[test]
    fn gender_matching() {
        let pairs = vec![
            pair("ff", Gender::Female, Gender::Female, None),
            pair("fm", Gender::Female, Gender::Male, None),
            pair("uu", Gender::Unknown, Gender::Unknown, None),
        ];
        let kept: Vec<String> = match_gender(&pairs).into_iter().map(|p| p.pair_id).collect();
        assert_eq!(kept, vec!["ff".to_string()]);
    }

    #[test]
    fn similarity_order_is_stable() {
        let pairs = vec![
            pair("a", Gender::Male, Gender::Male, Some(0.7)),
            pair("b", Gender::Male, Gender::Male, Some(0.9)),
            pair("c", Gender::Male, Gender::Male, Some(0.8)),
            pair("d", Gender::Male, Gender::Male, Some(0.8)),
        ];
        let ids: Vec<String> = rank_by_similarity(&pairs).unwrap().into_iter().map(|p| p.pair_id).collect();
        assert_eq!(ids, vec!["b", "c", "d", "a"]);
        let bad = vec![pair("x", Gender::Male, Gender::Male, None)];
        assert_eq!(
            rank_by_similarity(&bad),
            Err(CurationError::MissingSimilarity("x".into()))
        );
    }

    #[test]
    fn pitch_variability_order() {
        let pairs = vec![
            pair("flat", Gender::Male, Gender::Male, None),
            pair("lively", Gender::Male, Gender::Male, None),
        ];
        let mut contours = BTreeMap::new();
        contours.insert(
            "flat".to_string(),
            F0Contour { frame_shift_s: 0.01, frames: vec![Some(120.0); 10] },
        );
        contours.insert(
            "lively".to_string(),
            F0Contour {
                frame_shift_s: 0.01,
                frames: (0..10).map(|i| Some(100.0 + 20.0 * i as f64)).collect(),
            },
        );
        let ids: Vec<String> = rank_by_pitch_variability(&pairs, &contours)
            .unwrap()
            .into_iter()
            .map(|p| p.pair_id)
            .collect();
        assert_eq!(ids, vec!["lively", "flat"]);
        contours.remove("flat");
        assert_eq!(
            rank_by_pitch_variability(&pairs, &contours),
            Err(CurationError::MissingContour("flat".into()))
        );
    }
}
