//! Campaign definitions and their validation.

use std::collections::{BTreeMap, BTreeSet};

use prosync_core::model::{Aspect, RatingRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_ANNOTATIONS_PER_PAIR: usize = 5;
pub const DEFAULT_CALIBRATION_TOLERANCE: u8 = 1;

fn default_annotations() -> usize {
    DEFAULT_ANNOTATIONS_PER_PAIR
}

fn default_tolerance() -> u8 {
    DEFAULT_CALIBRATION_TOLERANCE
}

fn default_aspect_order() -> Vec<Aspect> {
    Aspect::ORDER.to_vec()
}

/// One source/target audio pair as rendered by one system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDef {
    pub pair_id: String,
    pub system_id: String,
    pub src_audio_url: String,
    pub tgt_audio_url: String,
    pub duration_s: f64,
}

impl PairDef {
    pub fn key(&self) -> (&str, &str) {
        (&self.pair_id, &self.system_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRating {
    #[serde(default)]
    pub audio_issue: bool,
    #[serde(default)]
    pub ratings: BTreeMap<Aspect, u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPair {
    #[serde(flatten)]
    pub pair: PairDef,
    pub gold: GoldRating,
}

/// What clients POST. Omitted fields take their defaults; an omitted id is
/// derived from the content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignDefinition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub campaign_id: Option<String>,
    pub pairs: Vec<PairDef>,
    #[serde(default)]
    pub calibration_pairs: Vec<CalibrationPair>,
    #[serde(default = "default_annotations")]
    pub annotations_per_pair: usize,
    #[serde(default = "default_aspect_order")]
    pub aspect_order: Vec<Aspect>,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub calibration_tolerance: u8,
}

/// A validated definition with its id fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub campaign_id: String,
    pub pairs: Vec<PairDef>,
    pub calibration_pairs: Vec<CalibrationPair>,
    pub annotations_per_pair: usize,
    pub aspect_order: Vec<Aspect>,
    pub seed: u64,
    pub calibration_tolerance: u8,
}

fn valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len())
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl CampaignDefinition {
    /// Checks the definition and resolves the campaign id.
    pub fn into_campaign(self) -> Result<Campaign, Vec<String>> {
        let mut problems = Vec::new();
        if self.annotations_per_pair == 0 {
            problems.push("annotations_per_pair must be at least 1".to_string());
        }
        if self.aspect_order != Aspect::ORDER {
            problems.push(
                "aspect_order must be meaning, emphasis, intonation, rhythm, emotion, manner"
                    .to_string(),
            );
        }
        if self.pairs.is_empty() {
            problems.push("campaign has no pairs".to_string());
        }
        let mut seen = BTreeSet::new();
        let all = self
            .pairs
            .iter()
            .map(|p| ("pair", p))
            .chain(self.calibration_pairs.iter().map(|c| ("calibration pair", &c.pair)));
        for (kind, p) in all {
            if p.pair_id.is_empty() || p.system_id.is_empty() {
                problems.push(format!("{kind} with empty pair_id or system_id"));
            }
            if !(p.duration_s > 0.0 && p.duration_s.is_finite()) {
                problems.push(format!("{kind} {}/{}: duration_s must be positive", p.pair_id, p.system_id));
            }
            if !seen.insert(p.key()) {
                problems.push(format!("{kind} {}/{} is listed twice", p.pair_id, p.system_id));
            }
        }
        for c in &self.calibration_pairs {
            let as_record = RatingRecord {
                pair_id: c.pair.pair_id.clone(),
                annotator_id: "gold".into(),
                system_id: c.pair.system_id.clone(),
                audio_issue: c.gold.audio_issue,
                ratings: c.gold.ratings.clone(),
            };
            if let Err(v) = as_record.validate_submission() {
                for v in v {
                    problems.push(format!("gold for {}/{}: {v}", c.pair.pair_id, c.pair.system_id));
                }
            }
        }
        let campaign_id = match &self.campaign_id {
            Some(id) if !valid_id(id) => {
                problems.push(format!("campaign_id {id:?} must be 1-64 characters of [A-Za-z0-9_-]"));
                id.clone()
            }
            Some(id) => id.clone(),
            None => self.derived_id(),
        };
        if !problems.is_empty() {
            return Err(problems);
        }
        Ok(Campaign {
            campaign_id,
            pairs: self.pairs,
            calibration_pairs: self.calibration_pairs,
            annotations_per_pair: self.annotations_per_pair,
            aspect_order: self.aspect_order,
            seed: self.seed,
            calibration_tolerance: self.calibration_tolerance,
        })
    }

    /// `c-` plus 16 hex digits of the SHA-256 of the definition's canonical
    /// JSON, so resubmitting identical content yields the same id.
    pub fn derived_id(&self) -> String {
        let body = CampaignDefinition {
            campaign_id: None,
            ..self.clone()
        };
        let json = serde_json::to_vec(&body).expect("definition serializes");
        let digest = Sha256::digest(&json);
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        format!("c-{hex}")
    }
}

impl Campaign {
    /// Whether `record` agrees with the gold answer of calibration pair
    /// `index`: the same audio-issue flag, the same aspects answered, and
    /// each rating within the tolerance.
    pub fn calibration_passes(&self, index: usize, record: &RatingRecord) -> bool {
        let gold = &self.calibration_pairs[index].gold;
        if gold.audio_issue != record.audio_issue {
            return false;
        }
        let tol = self.calibration_tolerance as i16;
        Aspect::ORDER.iter().all(|a| {
            match (gold.ratings.get(a), record.ratings.get(a)) {
                (None, None) => true,
                (Some(&g), Some(&r)) => (g as i16 - r as i16).abs() <= tol,
                _ => false,
            }
        })
    }
}
