use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{window, Spectrogram, StftConfig, TimeSignal};
use crate::error::{Error, Result};

/// One-sided STFT of every channel. Frame `t` covers samples
/// `t*hop .. t*hop + window_length`; trailing samples that do not fill a
/// window are dropped.
pub fn analyze(signal: &TimeSignal, config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    let n = config.window_length;
    if signal.len() < n {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            needed: n,
        });
    }
    let frames = config.frames(signal.len());
    let bins = config.bins();
    let win = window(config.window, n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut data = Array3::<Complex64>::zeros((signal.channels(), bins, frames));

    for (c, row) in signal.samples().rows().into_iter().enumerate() {
        for t in 0..frames {
            let start = t * config.hop;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(row[start + i] * win[i], 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for f in 0..bins {
                data[[c, f, t]] = buf[f];
            }
        }
    }
    Spectrogram::new(data, *config, signal.sample_rate())
}

/// Weighted overlap-add inverse of [`analyze`]: each frame is inverse
/// transformed, multiplied by the analysis window, accumulated, and the sum
/// divided by the accumulated squared-window envelope.
///
/// The output covers `(frames - 1) * hop + window_length` samples. Samples
/// outside [`StftConfig::interior`] whose envelope vanishes are set to zero;
/// a vanishing envelope inside the interior is an error.
pub fn synthesize(spec: &Spectrogram) -> Result<TimeSignal> {
    let config = spec.config();
    let n = config.window_length;
    let hop = config.hop;
    let frames = spec.frames();
    let bins = spec.bins();
    let len = (frames - 1) * hop + n;
    let win = window(config.window, n);

    let mut envelope = vec![0.0; len];
    for t in 0..frames {
        for (i, w) in win.iter().enumerate() {
            envelope[t * hop + i] += w * w;
        }
    }
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let floor = peak * f64::EPSILON;
    let interior = config.interior(frames);
    if let Some(sample) = interior.clone().find(|&i| envelope[i] <= floor) {
        return Err(Error::WindowNotInvertible { sample });
    }

    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
    let mut out = Array2::<f64>::zeros((spec.channels(), len));
    let scale = 1.0 / n as f64;

    for c in 0..spec.channels() {
        for t in 0..frames {
            buf[0] = Complex64::new(spec.data()[[c, 0, t]].re, 0.0);
            for f in 1..bins - 1 {
                let v = spec.data()[[c, f, t]];
                buf[f] = v;
                buf[n - f] = v.conj();
            }
            buf[n / 2] = Complex64::new(spec.data()[[c, n / 2, t]].re, 0.0);
            ifft.process_with_scratch(&mut buf, &mut scratch);
            let start = t * hop;
            for (i, (b, w)) in buf.iter().zip(&win).enumerate() {
                out[[c, start + i]] += b.re * scale * w;
            }
        }
        for (i, env) in envelope.iter().enumerate() {
            if *env > floor {
                out[[c, i]] /= env;
            } else {
                out[[c, i]] = 0.0;
            }
        }
    }
    TimeSignal::new(out, spec.sample_rate())
}
