//! Scoring of annotation campaigns: filters, item and system scores, paired
//! significance tests, the duration/agreement correlation and emotion-label
//! analytics.

mod correlation;
mod emotion;
mod protocol;
mod report;
mod wilcoxon;

use thiserror::Error;

use crate::model::Aspect;

pub use correlation::{
    duration_agreement, has_majority, pearson, AgreementGroup, AgreementSample, DurationAgreement,
};
pub use emotion::{
    emotion_report, emotion_top_labels, overlap_cdf, top_label_stats, top_labels_by_example,
    EmotionReport, LabelSet, TopLabelStats,
};
pub use protocol::{
    filter_records, flatline_annotators, item_score, item_scores, system_score, system_scores,
    ItemKey, ItemScore, Removal, RemovalReason, SystemScore, FLATLINE_MIN_RATINGS,
};
pub use report::{score_campaign, write_tsv, ScoreOptions, ScoreReport, TestRow};
pub use wilcoxon::{
    bonferroni, wilcoxon_signed_rank, wilcoxon_signed_rank_with, MethodChoice, WilcoxonMethod,
    WilcoxonResult, EXACT_MAX_N,
};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no ratings to score")]
    EmptyRatings,
    #[error("no items for system {system_id} on {aspect}")]
    NoItems { system_id: String, aspect: Aspect },
    #[error("paired samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least 2 duration groups, got {0}")]
    TooFewGroups(usize),
    #[error("correlation undefined: a variable has zero variance")]
    DegenerateVariance,
    #[error("p-value {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("annotations do not describe a single example: {0}")]
    InconsistentExample(String),
}
