use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use ndarray::Array2;

use super::TimeSignal;
use crate::error::{Error, Result};

/// On-disk sample encoding for [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavFormat {
    Pcm16,
    #[default]
    Float32,
}

const PCM16_SCALE: f64 = 32768.0;

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a 16-bit PCM or 32-bit float WAV. PCM samples map to `s / 32768`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<TimeSignal> {
    let path = path.as_ref();
    let mut reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::UnsupportedWav {
            path: path.to_path_buf(),
            detail: "zero channels".into(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (format, bits) => {
            return Err(Error::UnsupportedWav {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?} (expected 16-bit PCM or 32-bit float)"),
            })
        }
    };
    let frames = interleaved.len() / channels;
    let mut samples = Array2::zeros((channels, frames));
    for (i, v) in interleaved.into_iter().take(frames * channels).enumerate() {
        samples[[i % channels, i / channels]] = v;
    }
    TimeSignal::new(samples, spec.sample_rate)
}

/// Writes the signal interleaved. PCM16 rounds `x * 32768` and clamps to the
/// i16 range, so in-range samples round-trip within one LSB.
pub fn write_wav(path: impl AsRef<Path>, signal: &TimeSignal, format: WavFormat) -> Result<()> {
    let path = path.as_ref();
    let channels = u16::try_from(signal.channels())
        .map_err(|_| Error::InvalidConfig("too many channels for WAV".into()))?;
    let (bits_per_sample, sample_format) = match format {
        WavFormat::Pcm16 => (16, SampleFormat::Int),
        WavFormat::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels,
        sample_rate: signal.sample_rate(),
        bits_per_sample,
        sample_format,
    };
    let mut writer = WavWriter::create(path, spec).map_err(wav_err(path))?;
    let samples = signal.samples();
    for t in 0..signal.len() {
        for c in 0..signal.channels() {
            let v = samples[[c, t]];
            match format {
                WavFormat::Pcm16 => {
                    let q = (v * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q).map_err(wav_err(path))?;
                }
                WavFormat::Float32 => writer.write_sample(v as f32).map_err(wav_err(path))?,
            }
        }
    }
    writer.finalize().map_err(wav_err(path))
}
