//! F0 contour files (JSON Lines).
//!
//! The first line is a header, followed by one line per frame in order:
//!
//! ```text
//! {"format":"f0-contour","version":"1","frame_shift_s":0.005,"n_frames":3}
//! {"frame":0}
//! {"frame":1,"f0_hz":219.97}
//! {"frame":2,"f0_hz":220.01}
//! ```
//!
//! Unvoiced frames omit `f0_hz`.

use serde::{Deserialize, Serialize};

use crate::ingest::jsonl::MalformedLine;
use crate::model::F0Contour;

const FORMAT: &str = "f0-contour";
pub const CONTOUR_FORMAT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: String,
    frame_shift_s: f64,
    n_frames: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Frame {
    frame: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f0_hz: Option<f64>,
}

pub fn write_contour(contour: &F0Contour) -> String {
    let header = Header {
        format: FORMAT.into(),
        version: CONTOUR_FORMAT_VERSION.into(),
        frame_shift_s: contour.frame_shift_s,
        n_frames: contour.frames.len(),
    };
    let mut out = serde_json::to_string(&header).expect("header");
    out.push('\n');
    for (frame, f0_hz) in contour.frames.iter().enumerate() {
        out.push_str(&serde_json::to_string(&Frame { frame, f0_hz: *f0_hz }).expect("frame"));
        out.push('\n');
    }
    out
}

pub fn parse_contour(text: &str) -> Result<F0Contour, MalformedLine> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let bad = |line_no: usize, reason: String| MalformedLine { line_no, reason };

    let (no, first) = lines
        .next()
        .ok_or_else(|| bad(1, "empty contour file".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| bad(no, e.to_string()))?;
    if header.format != FORMAT || header.version != CONTOUR_FORMAT_VERSION {
        return Err(bad(no, "not an f0-contour v1 file".into()));
    }
    if !(header.frame_shift_s > 0.0) {
        return Err(bad(no, "frame_shift_s must be positive".into()));
    }

    let mut frames = Vec::with_capacity(header.n_frames);
    for (no, line) in lines {
        let f: Frame = serde_json::from_str(line).map_err(|e| bad(no, e.to_string()))?;
        if f.frame != frames.len() {
            return Err(bad(
                no,
                format!("expected frame {}, found {}", frames.len(), f.frame),
            ));
        }
        if let Some(hz) = f.f0_hz {
            if !(hz > 0.0 && hz.is_finite()) {
                return Err(bad(no, format!("invalid f0 {hz}")));
            }
        }
        frames.push(f.f0_hz);
    }
    if frames.len() != header.n_frames {
        return Err(bad(
            no,
            format!("header announces {} frames, found {}", header.n_frames, frames.len()),
        ));
    }
    Ok(F0Contour {
        frame_shift_s: header.frame_shift_s,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_unvoiced() {
        let c = F0Contour {
            frame_shift_s: 0.005,
            frames: vec![None, Some(219.97), Some(220.0123456789), None],
        };
        let text = write_contour(&c);
        assert!(text.lines().nth(1).unwrap() == r#"{"frame":0}"#);
        assert_eq!(parse_contour(&text).unwrap(), c);
    }

    #[test]
    fn frame_gap_is_reported() {
        let text = "{\"format\":\"f0-contour\",\"version\":\"1\",\"frame_shift_s\":0.005,\"n_frames\":2}\n{\"frame\":0}\n{\"frame\":2}\n";
        assert_eq!(parse_contour(text).unwrap_err().line_no, 3);
    }

    #[test]
    fn count_mismatch_is_reported() {
        let text = "{\"format\":\"f0-contour\",\"version\":\"1\",\"frame_shift_s\":0.005,\"n_frames\":2}\n{\"frame\":0}\n";
        assert!(parse_contour(text).is_err());
    }
}
