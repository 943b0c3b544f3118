//! JSON Lines readers and writers for manifests, ratings and emotion labels.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::model::{EmotionAnnotation, RatingRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line_no}: {reason}")]
pub struct MalformedLine {
    pub line_no: usize,
    pub reason: String,
}

/// Valid records plus a report of every rejected line.
#[derive(Debug, Clone, PartialEq)]
pub struct JsonlParse<T> {
    pub records: Vec<T>,
    pub errors: Vec<MalformedLine>,
}

impl<T> JsonlParse<T> {
    /// All records, or every line error if there was at least one.
    pub fn strict(self) -> Result<Vec<T>, Vec<MalformedLine>> {
        if self.errors.is_empty() {
            Ok(self.records)
        } else {
            Err(self.errors)
        }
    }
}

/// Parses one JSON object per non-blank line and applies `check` to each.
pub fn parse_jsonl<T, F>(text: &str, check: F) -> JsonlParse<T>
where
    T: DeserializeOwned,
    F: Fn(&T) -> Result<(), String>,
{
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(line)
            .map_err(|e| e.to_string())
            .and_then(|rec| check(&rec).map(|_| rec));
        match parsed {
            Ok(rec) => records.push(rec),
            Err(reason) => errors.push(MalformedLine { line_no, reason }),
        }
    }
    JsonlParse { records, errors }
}

/// One compact JSON object per line, each terminated by `\n`.
pub fn write_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable record"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        })
    }
}

/// One audio sample in a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub audio_path: String,
    pub language: String,
    pub gender: Gender,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosine_similarity: Option<f64>,
    pub duration_s: f64,
    /// Free-form record of external processing (denoising, transcription, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl ManifestEntry {
    pub fn check(&self) -> Result<(), String> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if let Some(mos) = self.mos {
            if !(1.0..=5.0).contains(&mos) {
                return Err(format!("mos {mos} outside [1, 5]"));
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(text: &str) -> JsonlParse<ManifestEntry> {
    parse_jsonl(text, ManifestEntry::check)
}

pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    write_jsonl(entries)
}

fn check_rating(r: &RatingRecord) -> Result<(), String> {
    r.validate().map_err(|v| {
        v.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    })
}

pub fn parse_ratings(text: &str) -> JsonlParse<RatingRecord> {
    parse_jsonl(text, check_rating)
}

pub fn write_ratings(records: &[RatingRecord]) -> String {
    write_jsonl(records)
}

pub fn parse_emotions(text: &str) -> JsonlParse<EmotionAnnotation> {
    parse_jsonl(text, |e: &EmotionAnnotation| {
        e.validate(None).map_err(|err| err.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MANIFEST: &str = r#"{"id":"a","audio_path":"a.wav","language":"en","gender":"female","mos":4.2,"duration_s":2.5}
{"id":"b","audio_path":"b.wav","language":"es","gender":"male","duration_s":1.0}

{"id":"c","audio_path":"c.wav","language":"en","gender":"unknown","mos":3.1,"cosine_similarity":0.8,"duration_s":3.0}
"#;

    #[test]
    fn three_valid_lines() {
        let p = parse_manifest(MANIFEST);
        assert!(p.errors.is_empty());
        assert_eq!(p.records.len(), 3);
        assert_eq!(p.records[2].cosine_similarity, Some(0.8));
    }

    #[test]
    fn mos_out_of_range_is_malformed() {
        let text = MANIFEST.replace("4.2", "5.5");
        let p = parse_manifest(&text);
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line_no, 1);
        assert!(p.errors[0].reason.contains("mos"));
    }

    #[test]
    fn bad_json_reports_line_number() {
        let text = format!("{MANIFEST}{{not json}}\n");
        let err = parse_manifest(&text).strict().unwrap_err();
        assert_eq!(err[0].line_no, 5);
    }

    #[test]
    fn rating_skip_violation_is_malformed() {
        let text = r#"{"pair_id":"p1","annotator_id":"a","system_id":"s","audio_issue":false,"ratings":{"meaning":1,"emphasis":3}}
{"pair_id":"p1","annotator_id":"b","system_id":"s","audio_issue":true,"ratings":{}}
"#;
        let p = parse_ratings(text);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.errors[0].line_no, 1);
        assert!(p.errors[0].reason.contains("meaning=1 forbids other aspects"));
    }

    #[test]
    fn unknown_aspect_rejected() {
        let text = r#"{"pair_id":"p","annotator_id":"a","system_id":"s","ratings":{"tempo":3}}"#;
        assert_eq!(parse_ratings(text).errors.len(), 1);
    }

    #[test]
    fn ratings_write_parse() {
        let recs = parse_ratings(
            r#"{"pair_id":"p","annotator_id":"a","system_id":"s","audio_issue":false,"ratings":{"meaning":4,"emphasis":3,"intonation":3,"rhythm":2,"emotion":4,"manner":3}}"#,
        )
        .strict()
        .unwrap();
        let text = write_ratings(&recs);
        assert!(text.contains(r#""ratings":{"meaning":4,"emphasis":3,"intonation":3,"rhythm":2,"emotion":4,"manner":3}"#));
        assert_eq!(parse_ratings(&text).strict().unwrap(), recs);
    }

    #[test]
    fn emotion_label_limits() {
        let ok = r#"{"example_id":"x","language":"en","annotator_id":"a","labels":["happy"]}"#;
        let none = r#"{"example_id":"x","language":"en","annotator_id":"a","labels":[]}"#;
        let p = parse_emotions(&format!("{ok}\n{none}\n"));
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.errors[0].line_no, 2);
    }
}
