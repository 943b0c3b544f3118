//! The control-spec file handed to a downstream TTS.
//!
//! ```text
//! {
//!   "version": "1",
//!   "entries": [
//!     {"type": "phone", "symbol": "HH", "base_duration_s": 0.050000, "duration_scale": 1.000000, "f0_target_hz": 210.500000},
//!     {"type": "pause", "duration_s": 0.600000}
//!   ],
//!   "global_style": [0.100000, -0.250000]
//! }
//! ```
//!
//! Keys always appear in the order above and every number is written with six
//! decimals, so the same spec always serializes to the same bytes.

use serde::Deserialize;
use thiserror::Error;

use crate::model::{ControlEntry, ControlSpec};

pub const CONTROL_SPEC_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ControlSpecError {
    #[error("invalid control spec JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported control spec version '{0}'")]
    Version(String),
    #[error("non-finite number in control spec")]
    NonFinite,
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

pub fn write_control_spec(spec: &ControlSpec) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"version\": {},\n", string(CONTROL_SPEC_VERSION)));
    out.push_str("  \"entries\": [");
    for (i, e) in spec.entries.iter().enumerate() {
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        match e {
            ControlEntry::Phone(p) => {
                out.push_str(&format!(
                    "{{\"type\": \"phone\", \"symbol\": {}, \"base_duration_s\": {}, \"duration_scale\": {}",
                    string(&p.symbol),
                    num(p.base_duration_s),
                    num(p.duration_scale)
                ));
                if let Some(f0) = p.f0_target_hz {
                    out.push_str(&format!(", \"f0_target_hz\": {}", num(f0)));
                }
                out.push('}');
            }
            ControlEntry::Pause { duration_s } => {
                out.push_str(&format!(
                    "{{\"type\": \"pause\", \"duration_s\": {}}}",
                    num(*duration_s)
                ));
            }
        }
    }
    if !spec.entries.is_empty() {
        out.push_str("\n  ");
    }
    out.push(']');
    if let Some(style) = &spec.global_style {
        let values: Vec<_> = style.iter().map(|v| num(*v)).collect();
        out.push_str(&format!(",\n  \"global_style\": [{}]", values.join(", ")));
    }
    out.push_str("\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlSpecFile {
    version: String,
    entries: Vec<ControlEntry>,
    #[serde(default)]
    global_style: Option<Vec<f64>>,
}

pub fn parse_control_spec(text: &str) -> Result<ControlSpec, ControlSpecError> {
    let file: ControlSpecFile = serde_json::from_str(text)?;
    if file.version != CONTROL_SPEC_VERSION {
        return Err(ControlSpecError::Version(file.version));
    }
    let spec = ControlSpec {
        entries: file.entries,
        global_style: file.global_style,
    };
    let finite = spec.entries.iter().all(|e| match e {
        ControlEntry::Phone(p) => {
            p.base_duration_s.is_finite()
                && p.duration_scale.is_finite()
                && p.f0_target_hz.is_none_or(f64::is_finite)
        }
        ControlEntry::Pause { duration_s } => duration_s.is_finite(),
    });
    if !finite {
        return Err(ControlSpecError::NonFinite);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhoneControl;

    fn sample() -> ControlSpec {
        ControlSpec {
            entries: vec![
                ControlEntry::Phone(PhoneControl {
                    symbol: "HH".into(),
                    base_duration_s: 0.05,
                    duration_scale: 1.0,
                    f0_target_hz: Some(210.5),
                }),
                ControlEntry::Pause { duration_s: 0.6 },
                ControlEntry::Phone(PhoneControl {
                    symbol: "AH0".into(),
                    base_duration_s: 0.1,
                    duration_scale: 2.0,
                    f0_target_hz: None,
                }),
            ],
            global_style: Some(vec![0.1, -0.25]),
        }
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(write_control_spec(&sample()), write_control_spec(&sample()));
    }

    #[test]
    fn exact_layout() {
        let text = write_control_spec(&sample());
        let expected = concat!(
            "{\n",
            "  \"version\": \"1\",\n",
            "  \"entries\": [\n",
            "    {\"type\": \"phone\", \"symbol\": \"HH\", \"base_duration_s\": 0.050000, \"duration_scale\": 1.000000, \"f0_target_hz\": 210.500000},\n",
            "    {\"type\": \"pause\", \"duration_s\": 0.600000},\n",
            "    {\"type\": \"phone\", \"symbol\": \"AH0\", \"base_duration_s\": 0.100000, \"duration_scale\": 2.000000}\n",
            "  ],\n",
            "  \"global_style\": [0.100000, -0.250000]\n",
            "}\n",
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn absent_f0_is_omitted_not_zero() {
        let text = write_control_spec(&sample());
        let last = text.lines().find(|l| l.contains("AH0")).unwrap();
        assert!(!last.contains("f0_target_hz"));
        assert!(!text.contains("null"));
    }

    #[test]
    fn round_trip() {
        let spec = sample();
        assert_eq!(parse_control_spec(&write_control_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn empty_spec() {
        let spec = ControlSpec::default();
        let text = write_control_spec(&spec);
        assert_eq!(text, "{\n  \"version\": \"1\",\n  \"entries\": []\n}\n");
        assert_eq!(parse_control_spec(&text).unwrap(), spec);
    }

    #[test]
    fn rejects_other_versions() {
        let text = write_control_spec(&sample()).replace("\"1\"", "\"2\"");
        assert!(matches!(parse_control_spec(&text), Err(ControlSpecError::Version(v)) if v == "2"));
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(num(-0.0), "0.000000");
        assert_eq!(num(-1e-9), "0.000000");
    }
}
