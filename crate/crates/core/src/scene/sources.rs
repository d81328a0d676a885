use std::path::PathBuf;

use ndarray::Array2;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{stream, SOURCE_STREAM};
use crate::error::{Error, Result};
use crate::spectral::{read_wav, TimeSignal};

/// Where source signals come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// Laplacian white noise under a slowly varying random envelope with
    /// occasional pauses, a cheap stand-in for speech.
    LaplacianNoise,
    /// WAV files at the requested sample rate; a seeded draw picks one
    /// distinct file per source and uses its first channel.
    SpeechFiles(Vec<PathBuf>),
}

/// Generates `k` source signals of `duration_s` seconds.
pub fn synth_sources(
    k: usize,
    duration_s: f64,
    sample_rate: u32,
    kind: &SourceKind,
    seed: u64,
) -> Result<TimeSignal> {
    if k == 0 {
        return Err(Error::InvalidConfig("need at least one source".into()));
    }
    if !(duration_s > 0.0) || !duration_s.is_finite() || sample_rate == 0 {
        return Err(Error::InvalidConfig(
            "duration and sample rate must be positive".into(),
        ));
    }
    let n = ((duration_s * sample_rate as f64).round() as usize).max(1);
    let mut samples = Array2::zeros((k, n));
    match kind {
        SourceKind::LaplacianNoise => {
            for (src, mut row) in samples.rows_mut().into_iter().enumerate() {
                let mut rng = stream(seed, SOURCE_STREAM + src as u64);
                let env = envelope(&mut rng, n, sample_rate);
                for (v, e) in row.iter_mut().zip(&env) {
                    let a: f64 = Exp1.sample(&mut rng);
                    let b: f64 = Exp1.sample(&mut rng);
                    *v = e * (a - b);
                }
            }
        }
        SourceKind::SpeechFiles(paths) => {
            if paths.len() < k {
                return Err(Error::InvalidConfig(format!(
                    "{k} sources requested but only {} speech files given",
                    paths.len()
                )));
            }
            let mut rng = stream(seed, SOURCE_STREAM - 1);
            let chosen: Vec<&PathBuf> = paths.choose_multiple(&mut rng, k).collect();
            for (mut row, path) in samples.rows_mut().into_iter().zip(chosen) {
                let sig = read_wav(path)?;
                let detail = if sig.sample_rate() != sample_rate {
                    Some(format!(
                        "sample rate {} Hz, expected {sample_rate} Hz",
                        sig.sample_rate()
                    ))
                } else if sig.len() < n {
                    Some(format!("{} samples, need {n}", sig.len()))
                } else {
                    None
                };
                if let Some(detail) = detail {
                    return Err(Error::SpeechFile {
                        path: path.clone(),
                        detail,
                    });
                }
                row.assign(&sig.channel(0).slice(ndarray::s![..n]));
            }
        }
    }
    TimeSignal::new(samples, sample_rate)
}

/// Piecewise-linear log-amplitude envelope with knots every 0.15 to 0.6 s;
/// about one segment in five is a pause at -30 dB.
fn envelope(rng: &mut impl Rng, n: usize, sample_rate: u32) -> Vec<f64> {
    let fs = sample_rate as f64;
    let mut knots = vec![(0usize, knot_level(rng))];
    while knots.last().unwrap().0 < n {
        let step = (rng.random_range(0.15..0.6) * fs).max(1.0) as usize;
        knots.push((knots.last().unwrap().0 + step, knot_level(rng)));
    }
    let mut env = Vec::with_capacity(n);
    for w in knots.windows(2) {
        let ((t0, l0), (t1, l1)) = (w[0], w[1]);
        for t in t0..t1.min(n) {
            let u = (t - t0) as f64 / (t1 - t0) as f64;
            env.push((l0 + u * (l1 - l0)).exp());
        }
    }
    env
}

fn knot_level(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.2) {
        0.03f64.ln()
    } else {
        let z: f64 = StandardNormal.sample(rng);
        0.5 * z
    }
}
