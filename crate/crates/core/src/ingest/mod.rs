//! Readers and writers for every external file format.

pub mod contour;
pub mod control_spec;
pub mod jsonl;
pub mod pharaoh;
pub mod textgrid;
pub mod transcript;

pub use contour::{parse_contour, write_contour, CONTOUR_FORMAT_VERSION};
pub use control_spec::{
    parse_control_spec, write_control_spec, ControlSpecError, CONTROL_SPEC_VERSION,
};
pub use jsonl::{
    parse_emotions, parse_jsonl, parse_manifest, parse_ratings, write_jsonl, write_manifest,
    write_ratings, Gender, JsonlParse, MalformedLine, ManifestEntry,
};
pub use pharaoh::{parse_pharaoh, write_pharaoh, PharaohError};
pub use textgrid::{parse_textgrid, write_textgrid, TextGridError};
pub use transcript::{parse_transcript, Token, Transcript};
