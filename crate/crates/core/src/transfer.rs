//! Local prosody transfer: pause insertion from punctuation, vowel duration
//! scaling from aligned source word durations, and word-level pitch transfer.
//! [`compile`] chains them into a [`ControlSpec`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Transcript;
use crate::model::{
    AlignedUtterance, ControlEntry, ControlSpec, F0Contour, ModelError, PhoneControl,
    SpeakerF0Stats, TransferConfig, VowelSet, WordAlignmentSet,
};
use crate::pitch::{interpolate_missing, normalize_f0, word_mean_f0, PitchError};

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("transcript has {tokens} tokens but the plan has {plans} words")]
    LengthMismatch { tokens: usize, plans: usize },
    #[error(
        "alignment is {n_src}x{n_tgt} but the source has {src_words} words and the plan {tgt_words}"
    )]
    IndexMismatch {
        n_src: usize,
        n_tgt: usize,
        src_words: usize,
        tgt_words: usize,
    },
    #[error("target word {index} ('{token}') has no positive predicted duration")]
    EmptyWord { index: usize, token: String },
    #[error("pitch transfer enabled but no contour or speaker statistics were supplied")]
    MissingPitchInputs,
    #[error(transparent)]
    Config(#[from] ModelError),
    #[error(transparent)]
    Pitch(#[from] PitchError),
    #[error("invalid target plan: {0}")]
    InvalidPlan(String),
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPhone {
    pub symbol: String,
    pub base_duration_s: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub duration_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_target_hz: Option<f64>,
}

impl PlannedPhone {
    pub fn new(symbol: impl Into<String>, base_duration_s: f64) -> Self {
        Self {
            symbol: symbol.into(),
            base_duration_s,
            duration_scale: 1.0,
            f0_target_hz: None,
        }
    }

    pub fn effective_duration_s(&self) -> f64 {
        self.base_duration_s * self.duration_scale
    }
}

/// A target-language word as predicted by the TTS front end, before and after
/// transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetWordPlan {
    pub token: String,
    pub phones: Vec<PlannedPhone>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_word_hz: Option<f64>,
}

impl TargetWordPlan {
    pub fn new(token: impl Into<String>, phones: Vec<PlannedPhone>) -> Self {
        Self {
            token: token.into(),
            phones,
            ratio: 1.0,
            f0_word_hz: None,
        }
    }

    pub fn predicted_word_duration_s(&self) -> f64 {
        self.phones.iter().map(|p| p.base_duration_s).sum()
    }
}

/// The `--tgt-plan` file: `{"words": [{"token": ..., "phones": [{"symbol": ..., "base_duration_s": ...}]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPlanFile {
    pub words: Vec<TargetWordPlan>,
}

pub fn parse_target_plan(text: &str) -> Result<Vec<TargetWordPlan>, TransferError> {
    let file: TargetPlanFile =
        serde_json::from_str(text).map_err(|e| TransferError::InvalidPlan(e.to_string()))?;
    check_plans(&file.words)?;
    Ok(file.words)
}

fn check_plans(plans: &[TargetWordPlan]) -> Result<(), TransferError> {
    for (index, p) in plans.iter().enumerate() {
        let bad_phone = p
            .phones
            .iter()
            .any(|ph| !(ph.base_duration_s.is_finite() && ph.base_duration_s >= 0.0));
        if bad_phone || !(p.predicted_word_duration_s() > 0.0) {
            return Err(TransferError::EmptyWord {
                index,
                token: p.token.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanItem {
    Word(TargetWordPlan),
    Pause { duration_s: f64 },
}

/// Appends a pause after every word whose trailing punctuation is in the
/// configured set, unless it is the last word.
pub fn insert_pauses(
    transcript: &Transcript,
    plans: Vec<TargetWordPlan>,
    cfg: &TransferConfig,
) -> Result<Vec<PlanItem>, TransferError> {
    if transcript.len() != plans.len() {
        return Err(TransferError::LengthMismatch {
            tokens: transcript.len(),
            plans: plans.len(),
        });
    }
    let n = plans.len();
    let mut out = Vec::with_capacity(n * 2);
    for (i, (token, plan)) in transcript.tokens.iter().zip(plans).enumerate() {
        out.push(PlanItem::Word(plan));
        let pauses = token
            .trailing_punct
            .is_some_and(|c| cfg.pause_punctuation.contains(&c));
        if pauses && i + 1 < n {
            out.push(PlanItem::Pause {
                duration_s: cfg.pause_s,
            });
        }
    }
    Ok(out)
}

fn check_dims(
    src: &AlignedUtterance,
    plans: &[TargetWordPlan],
    align: &WordAlignmentSet,
) -> Result<(), TransferError> {
    if align.n_src != src.words.len() || align.n_tgt != plans.len() {
        return Err(TransferError::IndexMismatch {
            n_src: align.n_src,
            n_tgt: align.n_tgt,
            src_words: src.words.len(),
            tgt_words: plans.len(),
        });
    }
    Ok(())
}

/// Per target word: summed duration of its aligned source words over its
/// predicted duration, clamped. Unaligned words get 1.0.
pub fn duration_ratios(
    src: &AlignedUtterance,
    plans: &[TargetWordPlan],
    align: &WordAlignmentSet,
    cfg: &TransferConfig,
) -> Result<Vec<f64>, TransferError> {
    check_dims(src, plans, align)?;
    check_plans(plans)?;
    Ok(plans
        .iter()
        .enumerate()
        .map(|(j, plan)| {
            let sources = align.sources_of(j);
            if sources.is_empty() {
                return 1.0;
            }
            let src_dur: f64 = sources.iter().map(|&i| src.words[i].duration_s()).sum();
            cfg.clamp_ratio(src_dur / plan.predicted_word_duration_s())
        })
        .collect())
}

/// Scales vowel phones by `ratio`; consonants keep a scale of exactly 1.0.
pub fn apply_duration_mod(mut plan: TargetWordPlan, ratio: f64, vowels: &VowelSet) -> TargetWordPlan {
    plan.ratio = ratio;
    for p in &mut plan.phones {
        p.duration_scale = if vowels.is_vowel(&p.symbol) { ratio } else { 1.0 };
    }
    plan
}

pub struct PitchInputs<'a> {
    pub contour: &'a F0Contour,
    pub src_stats: &'a SpeakerF0Stats,
    pub tgt_stats: &'a SpeakerF0Stats,
}

/// Word-level F0 transfer. Source word means are speaker-normalized, averaged
/// over the source words aligned to each target word, gap-filled across
/// unaligned (or unvoiced) target words, and copied onto every phone.
pub fn transfer_pitch(
    src: &AlignedUtterance,
    plans: Vec<TargetWordPlan>,
    align: &WordAlignmentSet,
    pitch: &PitchInputs<'_>,
) -> Result<Vec<TargetWordPlan>, TransferError> {
    check_dims(src, &plans, align)?;

    let src_f0 = src
        .words
        .iter()
        .map(|w| {
            word_mean_f0(pitch.contour, w)
                .map(|hz| normalize_f0(hz, pitch.src_stats, pitch.tgt_stats))
                .transpose()
        })
        .collect::<Result<Vec<Option<f64>>, _>>()?;

    let per_target: Vec<Option<f64>> = (0..plans.len())
        .map(|j| {
            let vals: Vec<f64> = align
                .sources_of(j)
                .into_iter()
                .filter_map(|i| src_f0[i])
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();

    let filled = interpolate_missing(&per_target)?;

    Ok(plans
        .into_iter()
        .zip(filled)
        .map(|(mut plan, hz)| {
            plan.f0_word_hz = Some(hz);
            for p in &mut plan.phones {
                p.f0_target_hz = Some(hz);
            }
            plan
        })
        .collect())
}

/// Which transfer components to run. All on by default.
#[derive(Debug, Clone, PartialEq)]
pub struct CompileOptions {
    pub duration: bool,
    pub pitch: bool,
    pub pauses: bool,
    pub vowels: VowelSet,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            duration: true,
            pitch: true,
            pauses: true,
            vowels: VowelSet::default(),
        }
    }
}

pub struct TransferInputs<'a> {
    pub transcript: &'a Transcript,
    pub src: &'a AlignedUtterance,
    pub plans: &'a [TargetWordPlan],
    pub alignment: &'a WordAlignmentSet,
    /// Required when pitch transfer is enabled.
    pub pitch: Option<PitchInputs<'a>>,
    pub global_style: Option<Vec<f64>>,
}

/// Duration ratios, vowel scaling, pitch transfer, then pauses. Ratios are
/// computed on the pause-free plan.
pub fn compile(
    inputs: &TransferInputs<'_>,
    cfg: &TransferConfig,
    opts: &CompileOptions,
) -> Result<ControlSpec, TransferError> {
    cfg.validate()?;
    check_dims(inputs.src, inputs.plans, inputs.alignment)?;
    check_plans(inputs.plans)?;
    if inputs.transcript.len() != inputs.plans.len() {
        return Err(TransferError::LengthMismatch {
            tokens: inputs.transcript.len(),
            plans: inputs.plans.len(),
        });
    }

    let mut plans: Vec<TargetWordPlan> = inputs
        .plans
        .iter()
        .cloned()
        .map(|mut p| {
            p.ratio = 1.0;
            p.f0_word_hz = None;
            for ph in &mut p.phones {
                ph.duration_scale = 1.0;
                ph.f0_target_hz = None;
            }
            p
        })
        .collect();

    if opts.duration {
        let ratios = duration_ratios(inputs.src, &plans, inputs.alignment, cfg)?;
        plans = plans
            .into_iter()
            .zip(ratios)
            .map(|(p, r)| apply_duration_mod(p, r, &opts.vowels))
            .collect();
    }

    if opts.pitch {
        let pitch = inputs.pitch.as_ref().ok_or(TransferError::MissingPitchInputs)?;
        plans = transfer_pitch(inputs.src, plans, inputs.alignment, pitch)?;
    }

    let items = if opts.pauses {
        insert_pauses(inputs.transcript, plans, cfg)?
    } else {
        plans.into_iter().map(PlanItem::Word).collect()
    };

    let mut entries = Vec::new();
    for item in items {
        match item {
            PlanItem::Word(w) => entries.extend(w.phones.into_iter().map(|p| {
                ControlEntry::Phone(PhoneControl {
                    symbol: p.symbol,
                    base_duration_s: p.base_duration_s,
                    duration_scale: p.duration_scale,
                    f0_target_hz: p.f0_target_hz,
                })
            })),
            PlanItem::Pause { duration_s } => entries.push(ControlEntry::Pause { duration_s }),
        }
    }

    Ok(ControlSpec {
        entries,
        global_style: inputs.global_style.clone(),
    })
}
