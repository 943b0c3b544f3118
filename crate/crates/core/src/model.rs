//! Shared domain types: alignments, pitch tracks, control plans and ratings.
//!
//! Every type here is a plain value object (`Clone + Send + Sync`) with a
//! serde representation that doubles as its canonical JSON form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a word's phones tile its span.
pub const WORD_TILING_TOLERANCE_S: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("interval [{start_s}, {end_s}] is empty or reversed")]
    EmptyInterval { start_s: f64, end_s: f64 },
    #[error("alignment pair {src}-{tgt} out of range for {n_src}x{n_tgt}")]
    AlignmentOutOfRange {
        src: usize,
        tgt: usize,
        n_src: usize,
        n_tgt: usize,
    },
    #[error("invalid transfer config: {0}")]
    InvalidTransferConfig(String),
    #[error("invalid emotion annotation: {0}")]
    InvalidEmotion(String),
}

/// ARPAbet vowel bases; a phone is a vowel when it is one of these followed by
/// a stress digit.
pub const ARPABET_VOWELS: [&str; 15] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];

/// Decides which phone symbols are vowels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VowelSet {
    /// ARPAbet vowel base carrying a 0/1/2 stress digit, e.g. `AH0`, `OW1`.
    #[default]
    ArpabetStress,
    /// Exact symbol membership.
    Explicit(BTreeSet<String>),
}

impl VowelSet {
    pub fn is_vowel(&self, symbol: &str) -> bool {
        match self {
            VowelSet::ArpabetStress => {
                let Some(last) = symbol.chars().last() else {
                    return false;
                };
                if !matches!(last, '0' | '1' | '2') {
                    return false;
                }
                let base = &symbol[..symbol.len() - 1];
                ARPABET_VOWELS.contains(&base)
            }
            VowelSet::Explicit(set) => set.contains(symbol),
        }
    }

    pub fn explicit<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        VowelSet::Explicit(symbols.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhoneInterval {
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
    pub is_vowel: bool,
}

impl PhoneInterval {
    pub fn new(
        label: impl Into<String>,
        start_s: f64,
        end_s: f64,
        vowels: &VowelSet,
    ) -> Result<Self, ModelError> {
        if !(start_s < end_s) {
            return Err(ModelError::EmptyInterval { start_s, end_s });
        }
        let label = label.into();
        let is_vowel = vowels.is_vowel(&label);
        Ok(Self {
            label,
            start_s,
            end_s,
            is_vowel,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpan {
    pub token: String,
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default)]
    pub phones: Vec<PhoneInterval>,
}

impl WordSpan {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    /// Reports tiling problems without repairing them.
    pub fn tiling_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.start_s < self.end_s) {
            out.push(format!("word '{}' has an empty span", self.token));
        }
        let mut prev_end = f64::NEG_INFINITY;
        for p in &self.phones {
            if p.start_s < prev_end {
                out.push(format!(
                    "word '{}': phone '{}' overlaps its predecessor",
                    self.token, p.label
                ));
            }
            if p.start_s < self.start_s - WORD_TILING_TOLERANCE_S
                || p.end_s > self.end_s + WORD_TILING_TOLERANCE_S
            {
                out.push(format!(
                    "word '{}': phone '{}' lies outside the word span",
                    self.token, p.label
                ));
            }
            prev_end = p.end_s;
        }
        if !self.phones.is_empty() {
            let sum: f64 = self.phones.iter().map(PhoneInterval::duration_s).sum();
            if (sum - self.duration_s()).abs() > WORD_TILING_TOLERANCE_S {
                out.push(format!(
                    "word '{}': phone durations sum to {:.6} s but the word spans {:.6} s",
                    self.token,
                    sum,
                    self.duration_s()
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedUtterance {
    pub words: Vec<WordSpan>,
    pub language: String,
    pub speaker_id: String,
}

impl AlignedUtterance {
    /// Ordering, overlap and per-word tiling violations.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for pair in self.words.windows(2) {
            if pair[1].start_s < pair[0].end_s {
                out.push(format!(
                    "words '{}' and '{}' overlap or are out of order",
                    pair[0].token, pair[1].token
                ));
            }
        }
        for w in &self.words {
            out.extend(w.tiling_violations());
        }
        out
    }
}

/// Frame-level pitch track. Unvoiced frames are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Contour {
    pub frame_shift_s: f64,
    pub frames: Vec<Option<f64>>,
}

impl F0Contour {
    /// Center time of frame `index`; frame `i` covers `[i, i + 1) * frame_shift_s`.
    pub fn frame_center_s(&self, index: usize) -> f64 {
        (index as f64 + 0.5) * self.frame_shift_s
    }

    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().filter_map(|f| *f)
    }

    pub fn n_voiced(&self) -> usize {
        self.frames.iter().filter(|f| f.is_some()).count()
    }
}

/// Log-domain speaker pitch statistics (natural log of Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeakerF0Stats {
    pub mean_log_f0: f64,
    pub std_log_f0: f64,
    pub n_voiced_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordAlignmentSet {
    pub pairs: BTreeSet<(usize, usize)>,
    pub n_src: usize,
    pub n_tgt: usize,
}

impl WordAlignmentSet {
    pub fn new(
        pairs: impl IntoIterator<Item = (usize, usize)>,
        n_src: usize,
        n_tgt: usize,
    ) -> Result<Self, ModelError> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if let Some(&(src, tgt)) = pairs.iter().find(|(s, t)| *s >= n_src || *t >= n_tgt) {
            return Err(ModelError::AlignmentOutOfRange {
                src,
                tgt,
                n_src,
                n_tgt,
            });
        }
        Ok(Self {
            pairs,
            n_src,
            n_tgt,
        })
    }

    /// Source indices aligned to target word `tgt`, ascending.
    pub fn sources_of(&self, tgt: usize) -> Vec<usize> {
        self.pairs
            .iter()
            .filter(|(_, t)| *t == tgt)
            .map(|(s, _)| *s)
            .collect()
    }

    /// Identity alignment `i-i` for `n` words on each side.
    pub fn one_to_one(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
            n_src: n,
            n_tgt: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhoneControl {
    pub symbol: String,
    pub base_duration_s: f64,
    pub duration_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_target_hz: Option<f64>,
}

impl PhoneControl {
    pub fn effective_duration_s(&self) -> f64 {
        self.base_duration_s * self.duration_scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ControlEntry {
    Phone(PhoneControl),
    Pause { duration_s: f64 },
}

/// Per-phoneme duration/pitch plan plus pause markers for a controllable TTS.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSpec {
    pub entries: Vec<ControlEntry>,
    /// Opaque utterance-level style vector, carried through untouched.
    pub global_style: Option<Vec<f64>>,
}

impl ControlSpec {
    pub fn total_duration_s(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| match e {
                ControlEntry::Phone(p) => p.effective_duration_s(),
                ControlEntry::Pause { duration_s } => *duration_s,
            })
            .sum()
    }

    pub fn phones(&self) -> impl Iterator<Item = &PhoneControl> {
        self.entries.iter().filter_map(|e| match e {
            ControlEntry::Phone(p) => Some(p),
            ControlEntry::Pause { .. } => None,
        })
    }

    pub fn n_pauses(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, ControlEntry::Pause { .. }))
            .count()
    }

    pub fn violations(&self, cfg: &TransferConfig) -> Vec<String> {
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            match e {
                ControlEntry::Phone(p) => {
                    if !(cfg.clamp_min..=cfg.clamp_max).contains(&p.duration_scale) {
                        out.push(format!(
                            "entry {i}: duration_scale {} outside [{}, {}]",
                            p.duration_scale, cfg.clamp_min, cfg.clamp_max
                        ));
                    }
                }
                ControlEntry::Pause { duration_s } => {
                    if *duration_s != cfg.pause_s {
                        out.push(format!(
                            "entry {i}: pause of {duration_s} s, expected {} s",
                            cfg.pause_s
                        ));
                    }
                }
            }
        }
        out
    }
}

pub fn default_pause_punctuation() -> BTreeSet<char> {
    [',', '.', ';', ':', '?', '!', '—'].into_iter().collect()
}

/// Knobs for the local transfer pipeline. F0 is always handled in the
/// natural-log domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub pause_s: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
    pub pause_punctuation: BTreeSet<char>,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            pause_s: 0.6,
            clamp_min: 0.25,
            clamp_max: 4.0,
            pause_punctuation: default_pause_punctuation(),
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.pause_s > 0.0) {
            return Err(ModelError::InvalidTransferConfig(format!(
                "pause_s must be positive, got {}",
                self.pause_s
            )));
        }
        if !(0.0 < self.clamp_min && self.clamp_min <= 1.0 && 1.0 <= self.clamp_max) {
            return Err(ModelError::InvalidTransferConfig(format!(
                "clamp bounds must satisfy 0 < min <= 1 <= max, got [{}, {}]",
                self.clamp_min, self.clamp_max
            )));
        }
        Ok(())
    }

    pub fn clamp_ratio(&self, ratio: f64) -> f64 {
        ratio.clamp(self.clamp_min, self.clamp_max)
    }
}

/// The six rated aspects, in the fixed order they are asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Meaning,
    Emphasis,
    Intonation,
    Rhythm,
    Emotion,
    Manner,
}

impl Aspect {
    pub const ORDER: [Aspect; 6] = [
        Aspect::Meaning,
        Aspect::Emphasis,
        Aspect::Intonation,
        Aspect::Rhythm,
        Aspect::Emotion,
        Aspect::Manner,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Meaning => "meaning",
            Aspect::Emphasis => "emphasis",
            Aspect::Intonation => "intonation",
            Aspect::Rhythm => "rhythm",
            Aspect::Emotion => "emotion",
            Aspect::Manner => "manner",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Aspect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Aspect::ORDER
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown aspect '{s}'"))
    }
}

pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    AudioIssueWithRatings,
    MeaningOneForbidsOthers,
    OutOfRange { aspect: Aspect, value: u8 },
    MissingMeaning,
    MissingAspects(Vec<Aspect>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AudioIssueWithRatings => f.write_str("audio_issue forbids ratings"),
            Violation::MeaningOneForbidsOthers => f.write_str("meaning=1 forbids other aspects"),
            Violation::OutOfRange { aspect, value } => {
                write!(f, "rating out of 1..4 ({aspect}={value})")
            }
            Violation::MissingMeaning => f.write_str("meaning rating is required"),
            Violation::MissingAspects(missing) => {
                let names: Vec<_> = missing.iter().map(|a| a.as_str()).collect();
                write!(f, "missing aspects: {}", names.join(", "))
            }
        }
    }
}

/// One annotator's judgment of one source/target audio pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub pair_id: String,
    pub annotator_id: String,
    pub system_id: String,
    #[serde(default)]
    pub audio_issue: bool,
    #[serde(default)]
    pub ratings: BTreeMap<Aspect, u8>,
}

impl RatingRecord {
    /// Checks the data invariants. Partial records (e.g. only `meaning`) are fine.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.audio_issue && !self.ratings.is_empty() {
            out.push(Violation::AudioIssueWithRatings);
        }
        if self.ratings.get(&Aspect::Meaning) == Some(&1) && self.ratings.len() > 1 {
            out.push(Violation::MeaningOneForbidsOthers);
        }
        for (&aspect, &value) in &self.ratings {
            if !(LIKERT_MIN..=LIKERT_MAX).contains(&value) {
                out.push(Violation::OutOfRange { aspect, value });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The stricter submission protocol: on top of [`validate`](Self::validate),
    /// a clear-audio record must rate meaning and, unless meaning is 1, all six
    /// aspects.
    pub fn validate_submission(&self) -> Result<(), Vec<Violation>> {
        let mut out = self.validate().err().unwrap_or_default();
        if !self.audio_issue {
            match self.ratings.get(&Aspect::Meaning) {
                None => out.push(Violation::MissingMeaning),
                Some(1) => {}
                Some(_) => {
                    let missing: Vec<_> = Aspect::ORDER
                        .into_iter()
                        .filter(|a| !self.ratings.contains_key(a))
                        .collect();
                    if !missing.is_empty() {
                        out.push(Violation::MissingAspects(missing));
                    }
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn rating(&self, aspect: Aspect) -> Option<u8> {
        self.ratings.get(&aspect).copied()
    }
}

pub const MAX_EMOTION_LABELS: usize = 7;

/// Default label inventory for emotion tagging.
pub const DEFAULT_EMOTION_VOCABULARY: [&str; 16] = [
    "admiration",
    "amusement",
    "angry",
    "anxious",
    "calm",
    "contempt",
    "disappointed",
    "disgusted",
    "excited",
    "fearful",
    "happy",
    "neutral",
    "proud",
    "relieved",
    "sad",
    "surprised",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmotionAnnotation {
    pub example_id: String,
    pub language: String,
    pub annotator_id: String,
    pub labels: BTreeSet<String>,
}

impl EmotionAnnotation {
    /// `vocabulary = None` accepts any label.
    pub fn validate(&self, vocabulary: Option<&BTreeSet<String>>) -> Result<(), ModelError> {
        if self.labels.is_empty() || self.labels.len() > MAX_EMOTION_LABELS {
            return Err(ModelError::InvalidEmotion(format!(
                "{} labels given, expected 1..={MAX_EMOTION_LABELS}",
                self.labels.len()
            )));
        }
        if let Some(vocab) = vocabulary {
            if let Some(bad) = self.labels.iter().find(|l| !vocab.contains(*l)) {
                return Err(ModelError::InvalidEmotion(format!(
                    "label '{bad}' is not in the vocabulary"
                )));
            }
        }
        Ok(())
    }
}

pub fn default_emotion_vocabulary() -> BTreeSet<String> {
    DEFAULT_EMOTION_VOCABULARY
        .iter()
        .map(|s| s.to_string())
        .collect()
}
