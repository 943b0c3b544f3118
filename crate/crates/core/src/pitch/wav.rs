use std::io::Read;
use std::path::Path;

use super::PitchError;

/// Mono PCM audio as `f64` samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// Reads a mono 16-bit integer or 32-bit float WAV stream.
pub fn read_wav<R: Read>(reader: R) -> Result<Audio, PitchError> {
    let reader = hound::WavReader::new(reader)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(PitchError::UnsupportedAudio(format!(
            "expected mono audio, found {} channels",
            spec.channels
        )));
    }
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<Result<Vec<_>, _>>()?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<Vec<_>, _>>()?,
        (fmt, bits) => {
            return Err(PitchError::UnsupportedAudio(format!(
                "{bits}-bit {fmt:?} samples"
            )))
        }
    };
    Ok(Audio {
        samples,
        sample_rate: spec.sample_rate,
    })
}

pub fn read_wav_file(path: impl AsRef<Path>) -> Result<Audio, PitchError> {
    let file = std::fs::File::open(path.as_ref()).map_err(hound::Error::IoError)?;
    read_wav(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn encode(channels: u16, samples: &[i16]) -> Vec<u8> {
        let spec = hound::WavSpec {
            channels,
            sample_rate: 16_000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut buf = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut buf, spec).unwrap();
        for s in samples {
            w.write_sample(*s).unwrap();
        }
        w.finalize().unwrap();
        buf.into_inner()
    }

    #[test]
    fn reads_mono_pcm16() {
        let audio = read_wav(Cursor::new(encode(1, &[0, 16384, -32768]))).unwrap();
        assert_eq!(audio.sample_rate, 16_000);
        assert_eq!(audio.samples, vec![0.0, 0.5, -1.0]);
    }

    #[test]
    fn rejects_stereo() {
        assert!(matches!(
            read_wav(Cursor::new(encode(2, &[0, 0]))),
            Err(PitchError::UnsupportedAudio(_))
        ));
    }
}
