//! Pitch analysis: F0 extraction, word-level averaging, speaker statistics,
//! log-domain mean/variance normalization and gap filling.

mod interp;
mod wav;
mod yin;

pub use interp::interpolate_missing;
pub use wav::{read_wav, read_wav_file, Audio};
pub use yin::extract_f0;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{F0Contour, SpeakerF0Stats, WordSpan};

#[derive(Debug, Error)]
pub enum PitchError {
    #[error("sample rate {0} Hz is below the 8000 Hz minimum")]
    SampleRateTooLow(u32),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("invalid pitch config: {0}")]
    InvalidConfig(String),
    #[error("no voiced frames")]
    NoVoicedFrames,
    #[error("source speaker statistics have zero log-F0 spread")]
    DegenerateSourceStats,
    #[error("no known values to interpolate from")]
    AllMissing,
    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub frame_shift_s: f64,
    pub frame_length_s: f64,
    pub yin_threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f_min: 70.0,
            f_max: 400.0,
            frame_shift_s: 0.005,
            frame_length_s: 0.040,
            yin_threshold: 0.15,
        }
    }
}

impl PitchConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<(), PitchError> {
        let nyquist = f64::from(sample_rate) / 2.0;
        if !(0.0 < self.f_min && self.f_min < self.f_max && self.f_max < nyquist) {
            return Err(PitchError::InvalidConfig(format!(
                "need 0 < f_min < f_max < {nyquist}, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        if !(self.frame_shift_s > 0.0 && self.frame_shift_s <= self.frame_length_s) {
            return Err(PitchError::InvalidConfig(format!(
                "need 0 < frame_shift_s <= frame_length_s, got {} and {}",
                self.frame_shift_s, self.frame_length_s
            )));
        }
        if !(self.yin_threshold > 0.0 && self.yin_threshold < 1.0) {
            return Err(PitchError::InvalidConfig(format!(
                "yin_threshold must lie in (0, 1), got {}",
                self.yin_threshold
            )));
        }
        Ok(())
    }
}

/// Mean F0 of the voiced frames whose center falls in `[start_s, end_s)`.
pub fn word_mean_f0(contour: &F0Contour, word: &WordSpan) -> Option<f64> {
    let (sum, n) = contour
        .frames
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.map(|hz| (contour.frame_center_s(i), hz)))
        .filter(|(t, _)| word.start_s <= *t && *t < word.end_s)
        .fold((0.0, 0usize), |(s, n), (_, hz)| (s + hz, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn log_mean_std(values: impl Iterator<Item = f64>) -> Option<(f64, f64, usize)> {
    let logs: Vec<f64> = values.map(f64::ln).collect();
    if logs.is_empty() {
        return None;
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt(), logs.len()))
}

/// Mean and population standard deviation of ln(F0) over every voiced frame.
pub fn speaker_stats(contours: &[F0Contour]) -> Result<SpeakerF0Stats, PitchError> {
    let (mean_log_f0, std_log_f0, n_voiced_frames) =
        log_mean_std(contours.iter().flat_map(F0Contour::voiced)).ok_or(PitchError::NoVoicedFrames)?;
    Ok(SpeakerF0Stats {
        mean_log_f0,
        std_log_f0,
        n_voiced_frames,
    })
}

/// Maps `f0_hz` from the source speaker's log-F0 distribution onto the target's.
pub fn normalize_f0(
    f0_hz: f64,
    src: &SpeakerF0Stats,
    tgt: &SpeakerF0Stats,
) -> Result<f64, PitchError> {
    if src.std_log_f0 <= 0.0 {
        return Err(PitchError::DegenerateSourceStats);
    }
    if src.mean_log_f0 == tgt.mean_log_f0 && src.std_log_f0 == tgt.std_log_f0 {
        return Ok(f0_hz);
    }
    let z = (f0_hz.ln() - src.mean_log_f0) / src.std_log_f0;
    Ok((tgt.mean_log_f0 + tgt.std_log_f0 * z).exp())
}

/// Population standard deviation of ln(F0) over the voiced frames.
pub fn pitch_variability(contour: &F0Contour) -> Result<f64, PitchError> {
    log_mean_std(contour.voiced())
        .map(|(_, std, _)| std)
        .ok_or(PitchError::NoVoicedFrames)
}
