use std::path::Path;

use ndarray::{s, Array2, Array3};
use rand_distr::{Distribution, StandardNormal};

use super::{stream, NOISE_STREAM};
use crate::dsp::convolve;
use crate::error::{Error, Result};
use crate::spectral::{read_wav, TimeSignal};

/// Room impulse responses indexed `[mic, source, tap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSystem {
    rir: Array3<f64>,
}

impl MixingSystem {
    /// Every tap must be finite. Pairs with an all-zero RIR are allowed and
    /// simply do not couple.
    pub fn new(rir: Array3<f64>) -> Result<Self> {
        let (mics, sources, len) = rir.dim();
        if mics == 0 || sources == 0 || len == 0 {
            return Err(Error::InvalidConfig("empty mixing system".into()));
        }
        if rir.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("RIR contains non-finite taps".into()));
        }
        Ok(Self { rir })
    }

    /// Loads measured RIRs, one WAV per microphone with one channel per
    /// source. All files must share `sample_rate`; shorter files are
    /// zero-padded to the longest.
    pub fn from_wav_files<P: AsRef<Path>>(paths: &[P], sample_rate: u32) -> Result<Self> {
        let signals = paths
            .iter()
            .map(|p| {
                let sig = read_wav(p)?;
                if sig.sample_rate() != sample_rate {
                    return Err(Error::UnsupportedWav {
                        path: p.as_ref().to_path_buf(),
                        detail: format!(
                            "sample rate {} Hz, expected {sample_rate} Hz",
                            sig.sample_rate()
                        ),
                    });
                }
                Ok(sig)
            })
            .collect::<Result<Vec<_>>>()?;
        let sources = signals.first().map_or(0, TimeSignal::channels);
        if signals.iter().any(|s| s.channels() != sources) {
            return Err(Error::DimensionMismatch(
                "every RIR file needs one channel per source".into(),
            ));
        }
        let len = signals.iter().map(TimeSignal::len).max().unwrap_or(0);
        let mut rir = Array3::zeros((signals.len(), sources, len));
        for (m, sig) in signals.iter().enumerate() {
            rir.slice_mut(s![m, .., ..sig.len()]).assign(sig.samples());
        }
        Self::new(rir)
    }

    pub fn rir(&self) -> &Array3<f64> {
        &self.rir
    }

    pub fn mics(&self) -> usize {
        self.rir.dim().0
    }

    pub fn sources(&self) -> usize {
        self.rir.dim().1
    }

    pub fn rir_length(&self) -> usize {
        self.rir.dim().2
    }
}

/// Convolutive mixture of `sources` through `system`, truncated to the
/// source length, plus white Gaussian noise scaled per microphone to exactly
/// `snr_db` below the mixed signal power. `snr_db = +inf` adds no noise.
pub fn mix(
    sources: &TimeSignal,
    system: &MixingSystem,
    snr_db: f64,
    seed: u64,
) -> Result<TimeSignal> {
    if sources.channels() != system.sources() {
        return Err(Error::DimensionMismatch(format!(
            "{} source signals for a {}-source mixing system",
            sources.channels(),
            system.sources()
        )));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!("invalid SNR {snr_db} dB")));
    }
    let n = sources.len();
    let mut out = Array2::<f64>::zeros((system.mics(), n));
    for m in 0..system.mics() {
        let mut row = out.row_mut(m);
        for src in 0..system.sources() {
            let x = sources.channel(src).to_vec();
            let h = system.rir.slice(s![m, src, ..]).to_vec();
            let y = convolve(&x, &h, n);
            row.iter_mut().zip(&y).for_each(|(o, v)| *o += v);
        }
    }

    if snr_db.is_finite() {
        let mut rng = stream(seed, NOISE_STREAM);
        for (m, mut row) in out.rows_mut().into_iter().enumerate() {
            let signal_power = row.iter().map(|v| v * v).sum::<f64>() / n as f64;
            if signal_power == 0.0 {
                return Err(Error::CannotCalibrateSnr { mic: m });
            }
            let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let noise_power = noise.iter().map(|v| v * v).sum::<f64>() / n as f64;
            let target = signal_power * 10f64.powf(-snr_db / 10.0);
            let scale = (target / noise_power).sqrt();
            row.iter_mut().zip(&noise).for_each(|(o, z)| *o += scale * z);
        }
    }
    TimeSignal::new(out, sources.sample_rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{synth_rir, synth_sources, SceneConfig, SourceKind};
    use ndarray::array;

    fn identity_system(k: usize) -> MixingSystem {
        let mut rir = Array3::zeros((k, k, 1));
        for m in 0..k {
            rir[[m, m, 0]] = 1.0;
        }
        MixingSystem::new(rir).unwrap()
    }

    #[test]
    fn identity_system_without_noise_passes_sources_through() {
        let src = synth_sources(2, 0.5, 8000, &SourceKind::LaplacianNoise, 4).unwrap();
        let mics = mix(&src, &identity_system(2), f64::INFINITY, 0).unwrap();
        for (a, b) in mics.samples().iter().zip(src.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sample_delay() {
        let src = TimeSignal::new(array![[1.0, 2.0, -3.0, 4.0, 0.5]], 8000).unwrap();
        let sys = MixingSystem::new(Array3::from_shape_vec((1, 1, 2), vec![0.0, 1.0]).unwrap())
            .unwrap();
        let mic = mix(&src, &sys, f64::INFINITY, 0).unwrap();
        let expected = [0.0, 1.0, 2.0, -3.0, 4.0];
        for (a, b) in mic.samples().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_db_snr_balances_powers() {
        let c = SceneConfig::desk(2, 11);
        let src = synth_sources(2, 1.0, 8000, &SourceKind::LaplacianNoise, 11).unwrap();
        let sys = synth_rir(&c).unwrap();
        let clean = mix(&src, &sys, f64::INFINITY, 11).unwrap();
        let noisy = mix(&src, &sys, 0.0, 11).unwrap();
        for m in 0..2 {
            let s = clean.channel(m);
            let noise = &noisy.channel(m) - &s;
            let snr = 10.0 * (s.dot(&s) / noise.dot(&noise)).log10();
            assert!(snr.abs() < 0.1, "mic {m}: {snr} dB");
        }
    }

    #[test]
    fn mixing_is_linear_before_noise() {
        let c = SceneConfig::desk(2, 5);
        let src = synth_sources(2, 0.5, 8000, &SourceKind::LaplacianNoise, 5).unwrap();
        let sys = synth_rir(&c).unwrap();
        let scaled = TimeSignal::new(src.samples() * -2.5, 8000).unwrap();
        let a = mix(&src, &sys, f64::INFINITY, 0).unwrap();
        let b = mix(&scaled, &sys, f64::INFINITY, 0).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert!((x * -2.5 - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn silent_mixture_cannot_be_calibrated() {
        let src = TimeSignal::new(Array2::zeros((2, 100)), 8000).unwrap();
        let sys = identity_system(2);
        assert!(matches!(
            mix(&src, &sys, 30.0, 0),
            Err(Error::CannotCalibrateSnr { mic: 0 })
        ));
        assert!(mix(&src, &sys, f64::INFINITY, 0).is_ok());
    }

    #[test]
    fn rejects_source_count_mismatch_and_bad_taps() {
        let src = TimeSignal::new(Array2::ones((3, 100)), 8000).unwrap();
        assert!(mix(&src, &identity_system(2), 30.0, 0).is_err());
        assert!(MixingSystem::new(Array3::from_elem((2, 2, 4), f64::NAN)).is_err());
    }

    #[test]
    fn loads_rirs_from_wav() {
        use crate::spectral::{write_wav, WavFormat};
        let dir = tempfile::tempdir().unwrap();
        let rirs = [array![[1.0, 0.5, 0.25], [0.0, 1.0, 0.0]], array![[0.0, 0.0, 1.0], [1.0, -0.5, 0.0]]];
        let paths: Vec<_> = rirs
            .iter()
            .enumerate()
            .map(|(m, r)| {
                let p = dir.path().join(format!("mic{m}.wav"));
                write_wav(&p, &TimeSignal::new(r.clone(), 8000).unwrap(), WavFormat::Float32)
                    .unwrap();
                p
            })
            .collect();
        let sys = MixingSystem::from_wav_files(&paths, 8000).unwrap();
        assert_eq!(sys.rir().dim(), (2, 2, 3));
        assert_eq!(sys.rir()[[1, 1, 1]], -0.5);
        assert!(MixingSystem::from_wav_files(&paths, 16000).is_err());
    }
}
