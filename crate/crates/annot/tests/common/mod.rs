#![allow(dead_code)]

use prosync_annot::{CalibrationPair, CampaignDefinition, GoldRating, PairDef};
use prosync_core::model::{Aspect, RatingRecord};

pub fn pair(pair_id: &str, system_id: &str) -> PairDef {
    PairDef {
        pair_id: pair_id.into(),
        system_id: system_id.into(),
        src_audio_url: format!("/audio/{pair_id}-src.wav"),
        tgt_audio_url: format!("/audio/{pair_id}-{system_id}.wav"),
        duration_s: 1.0 + (pair_id.len() % 5) as f64,
    }
}

pub fn definition(n_pairs: usize, systems: &[&str], calibration: usize) -> CampaignDefinition {
    let pairs = (0..n_pairs)
        .flat_map(|i| systems.iter().map(move |s| pair(&format!("p{i:02}"), s)))
        .collect();
    let calibration_pairs = (0..calibration)
        .map(|i| CalibrationPair {
            pair: pair(&format!("cal{i}"), "gold"),
            gold: GoldRating {
                audio_issue: false,
                ratings: Aspect::ORDER.iter().map(|&a| (a, 3)).collect(),
            },
        })
        .collect();
    CampaignDefinition {
        campaign_id: None,
        pairs,
        calibration_pairs,
        annotations_per_pair: 5,
        aspect_order: Aspect::ORDER.to_vec(),
        seed: 2024,
        calibration_tolerance: 1,
    }
}

/// A plausible rating for a study or calibration task: mostly complete
/// records, some meaning=1 skips and the occasional audio issue.
pub fn answer(annotator: &str, pair_id: &str, system_id: &str, salt: usize) -> RatingRecord {
    let h = pair_id.bytes().chain(annotator.bytes()).fold(salt, |acc, b| acc.wrapping_mul(31).wrapping_add(b as usize));
    let mut r = RatingRecord {
        pair_id: pair_id.into(),
        annotator_id: annotator.into(),
        system_id: system_id.into(),
        audio_issue: false,
        ratings: Default::default(),
    };
    if system_id == "gold" {
        r.ratings = Aspect::ORDER.iter().map(|&a| (a, 3)).collect();
    } else if h % 97 == 0 {
        r.audio_issue = true;
    } else if h % 11 == 0 {
        r.ratings.insert(Aspect::Meaning, 1);
    } else {
        for (i, a) in Aspect::ORDER.iter().enumerate() {
            r.ratings.insert(*a, 1 + ((h >> i) % 4) as u8);
        }
        r.ratings.insert(Aspect::Meaning, 2 + (h % 3) as u8);
    }
    r
}
