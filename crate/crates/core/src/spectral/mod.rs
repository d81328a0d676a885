//! Time-domain signals, STFT analysis/synthesis and WAV I/O.

mod stft;
mod wav;
mod window;

pub use stft::{analyze, synthesize};
pub use wav::{read_wav, write_wav, WavFormat};
pub use window::{window, WindowKind};

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A multichannel real signal, `samples` laid out as `[channels, samples]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Array2<f64>,
    sample_rate: u32,
}

impl TimeSignal {
    pub fn new(samples: Array2<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if samples.nrows() == 0 {
            return Err(Error::InvalidConfig("signal needs at least one channel".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a signal from per-channel vectors, which must have equal length.
    pub fn from_channels(channels: &[Vec<f64>], sample_rate: u32) -> Result<Self> {
        let len = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch(
                "all channels must have equal length".into(),
            ));
        }
        let mut samples = Array2::zeros((channels.len(), len));
        for (mut row, ch) in samples.rows_mut().into_iter().zip(channels) {
            row.assign(&ndarray::ArrayView1::from(ch.as_slice()));
        }
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Array2<f64> {
        &mut self.samples
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn channel(&self, c: usize) -> ndarray::ArrayView1<'_, f64> {
        self.samples.row(c)
    }

    /// Copies `len` samples starting at `start` from every channel.
    pub fn segment(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(Error::DimensionMismatch(format!(
                "segment {start}+{len} exceeds signal length {}",
                self.len()
            )));
        }
        let s = self.samples.slice(ndarray::s![.., start..start + len]).to_owned();
        Self::new(s, self.sample_rate)
    }
}

/// STFT framing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_length: 2048,
            hop: 1024,
            window: WindowKind::Hamming,
        }
    }
}

impl StftConfig {
    pub fn new(window_length: usize, hop: usize, window: WindowKind) -> Result<Self> {
        let cfg = Self {
            window_length,
            hop,
            window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length < 2 || !self.window_length.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "window length must be even and >= 2, got {}",
                self.window_length
            )));
        }
        if self.hop == 0 || self.hop > self.window_length {
            return Err(Error::InvalidConfig(format!(
                "hop must satisfy 0 < hop <= window length, got {}",
                self.hop
            )));
        }
        Ok(())
    }

    /// Number of one-sided frequency bins.
    pub fn bins(&self) -> usize {
        self.window_length / 2 + 1
    }

    /// Number of frames produced for a signal of `len` samples (no padding).
    pub fn frames(&self, len: usize) -> usize {
        if len < self.window_length {
            0
        } else {
            (len - self.window_length) / self.hop + 1
        }
    }

    /// Sample range `[start, end)` reconstructed with full window overlap
    /// for a `frames`-frame schedule.
    pub fn interior(&self, frames: usize) -> std::ops::Range<usize> {
        let start = self.window_length - self.hop;
        let end = frames * self.hop;
        start..end.max(start)
    }
}

/// Complex STFT tensor laid out as `[channels, bins, frames]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    data: Array3<Complex64>,
    config: StftConfig,
    sample_rate: u32,
}

impl Spectrogram {
    pub fn new(data: Array3<Complex64>, config: StftConfig, sample_rate: u32) -> Result<Self> {
        config.validate()?;
        let (_, bins, frames) = data.dim();
        if bins != config.bins() {
            return Err(Error::DimensionMismatch(format!(
                "spectrogram has {bins} bins, window length {} implies {}",
                config.window_length,
                config.bins()
            )));
        }
        if frames == 0 {
            return Err(Error::DimensionMismatch("spectrogram needs at least one frame".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(Self {
            data,
            config,
            sample_rate,
        })
    }

    pub fn data(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array3<Complex64> {
        self.data
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn bins(&self) -> usize {
        self.data.dim().1
    }

    pub fn frames(&self) -> usize {
        self.data.dim().2
    }

    /// Same framing and sample rate, new data.
    pub fn with_data(&self, data: Array3<Complex64>) -> Result<Self> {
        Self::new(data, self.config, self.sample_rate)
    }
}
