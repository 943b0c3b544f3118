//! In-memory campaign state derived by replaying the record logs. Pure and
//! synchronous; the service wraps it in snapshots.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use prosync_core::model::{RatingRecord, Violation};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::campaign::{Campaign, PairDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Calibration,
    Study,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub completed: usize,
    pub total: usize,
}

/// What `next` hands an annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Task {
    Task {
        phase: Phase,
        #[serde(flatten)]
        pair: PairDef,
        aspect_order: Vec<prosync_core::model::Aspect>,
        progress: Progress,
    },
    Done {
        progress: Progress,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubmitError {
    NotCurrentTask,
    DuplicateSubmission,
    ValidationFailed(Vec<Violation>),
}

/// Index of the current task within its phase's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Calibration(usize),
    Study(usize),
    Done,
}

#[derive(Debug, Clone)]
pub struct CampaignState {
    pub campaign: Arc<Campaign>,
    /// Accepted study records in submission order.
    pub records: Vec<RatingRecord>,
    /// Every calibration attempt in submission order.
    pub calibration_attempts: Vec<RatingRecord>,
    item_index: HashMap<(String, String), usize>,
    calibration_index: HashMap<(String, String), usize>,
    counts: Vec<usize>,
    rated: HashSet<(String, usize)>,
    /// Latest calibration outcome per (annotator, calibration index).
    calibration_passed: HashMap<(String, usize), bool>,
}

/// The annotator's private ordering of study pairs: a ChaCha8 shuffle seeded
/// from SHA-256(seed || annotator_id).
pub fn assignment_order(seed: u64, annotator_id: &str, n: usize) -> Vec<usize> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(annotator_id.as_bytes());
    let mut rng = ChaCha8Rng::from_seed(h.finalize().into());
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

fn key(pair_id: &str, system_id: &str) -> (String, String) {
    (pair_id.to_string(), system_id.to_string())
}

impl CampaignState {
    pub fn new(campaign: Arc<Campaign>) -> Self {
        let item_index = campaign
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (key(&p.pair_id, &p.system_id), i))
            .collect();
        let calibration_index = campaign
            .calibration_pairs
            .iter()
            .enumerate()
            .map(|(i, c)| (key(&c.pair.pair_id, &c.pair.system_id), i))
            .collect();
        let n = campaign.pairs.len();
        CampaignState {
            campaign,
            records: Vec::new(),
            calibration_attempts: Vec::new(),
            item_index,
            calibration_index,
            counts: vec![0; n],
            rated: HashSet::new(),
            calibration_passed: HashMap::new(),
        }
    }

    pub fn accepted_count(&self, pair_id: &str, system_id: &str) -> Option<usize> {
        self.item_index
            .get(&key(pair_id, system_id))
            .map(|&i| self.counts[i])
    }

    pub fn items_complete(&self) -> usize {
        self.counts
            .iter()
            .filter(|&&c| c >= self.campaign.annotations_per_pair)
            .count()
    }

    fn calibrated(&self, annotator: &str) -> usize {
        (0..self.campaign.calibration_pairs.len())
            .filter(|&i| {
                self.calibration_passed
                    .get(&(annotator.to_string(), i))
                    .copied()
                    .unwrap_or(false)
            })
            .count()
    }

    fn slot(&self, annotator: &str) -> Slot {
        let pending_calibration = (0..self.campaign.calibration_pairs.len()).find(|&i| {
            !self
                .calibration_passed
                .get(&(annotator.to_string(), i))
                .copied()
                .unwrap_or(false)
        });
        if let Some(i) = pending_calibration {
            return Slot::Calibration(i);
        }
        let k = self.campaign.annotations_per_pair;
        assignment_order(self.campaign.seed, annotator, self.campaign.pairs.len())
            .into_iter()
            .find(|&i| self.counts[i] < k && !self.rated.contains(&(annotator.to_string(), i)))
            .map_or(Slot::Done, Slot::Study)
    }

    fn study_progress(&self, annotator: &str) -> Progress {
        let completed = (0..self.campaign.pairs.len())
            .filter(|&i| self.rated.contains(&(annotator.to_string(), i)))
            .count();
        Progress {
            completed,
            total: self.campaign.pairs.len(),
        }
    }

    pub fn next_task(&self, annotator: &str) -> Task {
        let aspect_order = self.campaign.aspect_order.clone();
        match self.slot(annotator) {
            Slot::Calibration(i) => Task::Task {
                phase: Phase::Calibration,
                pair: self.campaign.calibration_pairs[i].pair.clone(),
                aspect_order,
                progress: Progress {
                    completed: self.calibrated(annotator),
                    total: self.campaign.calibration_pairs.len(),
                },
            },
            Slot::Study(i) => Task::Task {
                phase: Phase::Study,
                pair: self.campaign.pairs[i].clone(),
                aspect_order,
                progress: self.study_progress(annotator),
            },
            Slot::Done => Task::Done {
                progress: self.study_progress(annotator),
            },
        }
    }

    /// Decides whether `record` may be appended, without changing state.
    pub fn check(&self, record: &RatingRecord) -> Result<Phase, SubmitError> {
        let annotator = &record.annotator_id;
        let k = key(&record.pair_id, &record.system_id);
        if let Some(&i) = self.item_index.get(&k) {
            if self.rated.contains(&(annotator.clone(), i)) {
                return Err(SubmitError::DuplicateSubmission);
            }
        }
        let phase = match self.slot(annotator) {
            Slot::Calibration(i) if self.calibration_index.get(&k) == Some(&i) => Phase::Calibration,
            Slot::Study(i) if self.item_index.get(&k) == Some(&i) => Phase::Study,
            _ => return Err(SubmitError::NotCurrentTask),
        };
        record
            .validate_submission()
            .map_err(SubmitError::ValidationFailed)?;
        Ok(phase)
    }

    /// Records an already-checked submission. For calibration attempts the
    /// return value says whether it matched the gold answer.
    pub fn apply(&mut self, phase: Phase, record: RatingRecord) -> Option<bool> {
        let k = key(&record.pair_id, &record.system_id);
        match phase {
            Phase::Study => {
                let i = self.item_index[&k];
                self.counts[i] += 1;
                self.rated.insert((record.annotator_id.clone(), i));
                self.records.push(record);
                None
            }
            Phase::Calibration => {
                let i = self.calibration_index[&k];
                let passed = self.campaign.calibration_passes(i, &record);
                self.calibration_passed
                    .insert((record.annotator_id.clone(), i), passed);
                self.calibration_attempts.push(record);
                Some(passed)
            }
        }
    }

    /// Rebuilds state from persisted logs, re-checking every invariant the
    /// writer enforces. Calibration attempts and study records are stored
    /// in separate logs, so study records are replayed assuming calibration
    /// had already been passed when they were accepted.
    pub fn replay(
        campaign: Arc<Campaign>,
        calibration: Vec<RatingRecord>,
        records: Vec<RatingRecord>,
    ) -> Result<Self, String> {
        let mut state = CampaignState::new(campaign);
        for (n, r) in calibration.into_iter().enumerate() {
            let k = key(&r.pair_id, &r.system_id);
            if !state.calibration_index.contains_key(&k) {
                return Err(format!("calibration log entry {} names unknown pair {}/{}", n + 1, k.0, k.1));
            }
            state.apply(Phase::Calibration, r);
        }
        let k_max = state.campaign.annotations_per_pair;
        for (n, r) in records.into_iter().enumerate() {
            let Some(&i) = state.item_index.get(&key(&r.pair_id, &r.system_id)) else {
                return Err(format!("record {} names unknown pair {}/{}", n + 1, r.pair_id, r.system_id));
            };
            if state.rated.contains(&(r.annotator_id.clone(), i)) {
                return Err(format!("record {}: {} rated {}/{} twice", n + 1, r.annotator_id, r.pair_id, r.system_id));
            }
            if state.counts[i] >= k_max {
                return Err(format!("record {}: {}/{} exceeds {k_max} annotations", n + 1, r.pair_id, r.system_id));
            }
            if let Err(v) = r.validate_submission() {
                return Err(format!("record {}: {}", n + 1, v[0]));
            }
            state.apply(Phase::Study, r);
        }
        Ok(state)
    }
}
