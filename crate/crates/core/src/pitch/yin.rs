//! YIN fundamental-frequency estimation.
//!
//! Per frame: squared-difference function, cumulative-mean normalization,
//! the first dip below an absolute threshold (followed down to its local
//! minimum), then parabolic refinement of the lag. Frames with no dip below
//! the threshold are unvoiced. The normalized difference is scale-free, so
//! voicing decisions do not depend on input gain.

use super::{PitchConfig, PitchError};
use crate::model::F0Contour;

pub const MIN_SAMPLE_RATE: u32 = 8_000;

struct Analyzer {
    frame_len: usize,
    window: usize,
    tau_min: usize,
    tau_max: usize,
    threshold: f64,
    sample_rate: f64,
    f_min: f64,
    f_max: f64,
    diff: Vec<f64>,
}

impl Analyzer {
    fn new(sample_rate: u32, cfg: &PitchConfig) -> Result<Self, PitchError> {
        let sr = f64::from(sample_rate);
        let frame_len = (cfg.frame_length_s * sr).round() as usize;
        let tau_min = ((sr / cfg.f_max).floor() as usize).max(2);
        let tau_max = (sr / cfg.f_min).ceil() as usize;
        // The lag search reads one lag past tau_max for the parabola.
        if frame_len < 2 * (tau_max + 1) {
            return Err(PitchError::InvalidConfig(format!(
                "frame_length_s {} too short for f_min {} Hz (need at least {:.4} s)",
                cfg.frame_length_s,
                cfg.f_min,
                2.0 * (tau_max + 1) as f64 / sr
            )));
        }
        Ok(Self {
            frame_len,
            window: frame_len - tau_max - 1,
            tau_min,
            tau_max,
            threshold: cfg.yin_threshold,
            sample_rate: sr,
            f_min: cfg.f_min,
            f_max: cfg.f_max,
            diff: vec![0.0; tau_max + 2],
        })
    }

    fn estimate(&mut self, frame: &[f64]) -> Option<f64> {
        debug_assert_eq!(frame.len(), self.frame_len);
        let w = self.window;
        let d = &mut self.diff;

        d[0] = 0.0;
        for tau in 1..d.len() {
            d[tau] = frame[..w]
                .iter()
                .zip(&frame[tau..tau + w])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }

        // Cumulative mean normalized difference, in place.
        let mut running = 0.0;
        d[0] = 1.0;
        for tau in 1..d.len() {
            running += d[tau];
            d[tau] = if running > 0.0 {
                d[tau] * tau as f64 / running
            } else {
                1.0
            };
        }

        let mut tau = (self.tau_min..=self.tau_max).find(|&t| d[t] < self.threshold)?;
        while tau < self.tau_max && d[tau + 1] < d[tau] {
            tau += 1;
        }

        let (a, b, c) = (d[tau - 1], d[tau], d[tau + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom > 0.0 {
            (0.5 * (a - c) / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let f0 = self.sample_rate / (tau as f64 + shift);
        // The integer lag range brackets [f_min, f_max]; refinement may step
        // a hair outside it.
        Some(f0.clamp(self.f_min, self.f_max))
    }
}

/// Frame `i` is centered at `(i + 0.5) * frame_shift_s`; there is one frame
/// per started shift. Windows reaching past either end are zero-padded.
pub fn extract_f0(
    samples: &[f64],
    sample_rate: u32,
    cfg: &PitchConfig,
) -> Result<F0Contour, PitchError> {
    if sample_rate < MIN_SAMPLE_RATE {
        return Err(PitchError::SampleRateTooLow(sample_rate));
    }
    if samples.is_empty() {
        return Err(PitchError::EmptyAudio);
    }
    cfg.validate(sample_rate)?;
    let mut analyzer = Analyzer::new(sample_rate, cfg)?;

    let hop = cfg.frame_shift_s * f64::from(sample_rate);
    let n_frames = (samples.len() as f64 / hop).ceil() as usize;
    let half = analyzer.frame_len as f64 / 2.0;
    let mut buf = vec![0.0; analyzer.frame_len];

    let frames = (0..n_frames)
        .map(|i| {
            let start = ((i as f64 + 0.5) * hop - half).round() as isize;
            for (k, slot) in buf.iter_mut().enumerate() {
                let idx = start + k as isize;
                *slot = if idx >= 0 {
                    samples.get(idx as usize).copied().unwrap_or(0.0)
                } else {
                    0.0
                };
            }
            analyzer.estimate(&buf)
        })
        .collect();

    Ok(F0Contour {
        frame_shift_s: cfg.frame_shift_s,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const SR: u32 = 16_000;

    fn sine(freq: f64, seconds: f64, amp: f64) -> Vec<f64> {
        let n = (seconds * f64::from(SR)) as usize;
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / f64::from(SR)).sin())
            .collect()
    }

    /// Frames whose analysis window lies entirely inside the signal.
    fn interior(c: &F0Contour, cfg: &PitchConfig) -> std::ops::Range<usize> {
        let margin = (cfg.frame_length_s / cfg.frame_shift_s / 2.0).ceil() as usize + 1;
        margin..c.frames.len() - margin
    }

    fn fraction_within(c: &F0Contour, cfg: &PitchConfig, truth: f64, tol: f64) -> f64 {
        let range = interior(c, cfg);
        let n = range.len();
        let ok = c.frames[range]
            .iter()
            .filter(|f| f.is_some_and(|hz| (hz - truth).abs() <= tol))
            .count();
        ok as f64 / n as f64
    }

    #[test]
    fn pure_tone_220() {
        let cfg = PitchConfig::default();
        let c = extract_f0(&sine(220.0, 1.0, 0.5), SR, &cfg).unwrap();
        assert_eq!(c.frames.len(), 200);
        assert!(fraction_within(&c, &cfg, 220.0, 1.0) >= 0.95);
    }

    #[test]
    fn silence_is_unvoiced() {
        let c = extract_f0(&vec![0.0; SR as usize], SR, &PitchConfig::default()).unwrap();
        assert_eq!(c.n_voiced(), 0);
    }

    #[test]
    fn pulse_train_100() {
        let cfg = PitchConfig::default();
        let mut x = vec![0.0; SR as usize];
        for i in (0..x.len()).step_by(160) {
            x[i] = 1.0;
        }
        let c = extract_f0(&x, SR, &cfg).unwrap();
        assert_eq!(fraction_within(&c, &cfg, 100.0, 1.0), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = PitchConfig::default();
        assert!(matches!(
            extract_f0(&[0.0; 100], 4_000, &cfg),
            Err(PitchError::SampleRateTooLow(4_000))
        ));
        assert!(matches!(extract_f0(&[], SR, &cfg), Err(PitchError::EmptyAudio)));
        let short = PitchConfig {
            frame_length_s: 0.01,
            frame_shift_s: 0.005,
            ..cfg
        };
        assert!(matches!(
            extract_f0(&[0.0; 100], SR, &short),
            Err(PitchError::InvalidConfig(_))
        ));
    }

    #[test]
    fn gain_does_not_change_decisions() {
        let cfg = PitchConfig::default();
        let base = sine(150.0, 0.5, 0.3);
        let mut x = base.clone();
        // Half a second of a tone followed by silence and a glide.
        x.extend(std::iter::repeat_n(0.0, 2000));
        x.extend((0..4000).map(|i| {
            let t = i as f64 / f64::from(SR);
            0.3 * (2.0 * PI * (180.0 * t + 40.0 * t * t)).sin()
        }));
        let reference = extract_f0(&x, SR, &cfg).unwrap();
        for gain in [0.1, 10.0] {
            let scaled: Vec<f64> = x.iter().map(|v| v * gain).collect();
            let c = extract_f0(&scaled, SR, &cfg).unwrap();
            for (a, b) in reference.frames.iter().zip(&c.frames) {
                match (a, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 0.1),
                    (None, None) => {}
                    _ => panic!("voicing changed under gain {gain}"),
                }
            }
        }
    }

    #[test]
    fn f0_stays_in_configured_range() {
        let cfg = PitchConfig::default();
        for f in [100.0, 150.0, 220.0, 330.0, 400.0] {
            let c = extract_f0(&sine(f, 0.3, 0.5), SR, &cfg).unwrap();
            assert!(c.voiced().all(|hz| (cfg.f_min..=cfg.f_max).contains(&hz)));
        }
    }
}
