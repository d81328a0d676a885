use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use serde::{Deserialize, Serialize};

use ivasep::accel::{AccelConfig, Safeguard, Scheme, SecantSource, SquaremForm, SquaremStepLength};
use ivasep::eval::{EvalConfig, PermutationMode};
use ivasep::scene::{desk_delays, SceneConfig, SourceKind};
use ivasep::spectral::{StftConfig, WindowKind};

/// One experiment: a scene family, an algorithm and the repetition plan.
/// Repetition `r` uses seed `seed_base + r` for sources, RIRs and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub iterations: usize,
    pub repetitions: usize,
    pub eval_every: usize,
    pub seed_base: u64,
    pub output_path: PathBuf,
    pub scene: SceneSection,
    pub stft: StftSection,
    pub algorithm: AlgorithmSection,
    pub evaluation: EvaluationSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            iterations: 30,
            repetitions: 20,
            eval_every: 1,
            seed_base: 0,
            output_path: PathBuf::from("results"),
            scene: SceneSection::default(),
            stft: StftSection::default(),
            algorithm: AlgorithmSection::default(),
            evaluation: EvaluationSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub sources: usize,
    pub t60: f64,
    pub drr_db: f64,
    pub rir_length: usize,
    /// `inf` disables the sensor noise.
    pub snr_db: f64,
    pub sample_rate: u32,
    pub duration_s: f64,
    /// `[mic][source]` delays in samples; defaults to the desk geometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_delays: Option<Vec<Vec<usize>>>,
    /// Speech WAVs to draw sources from; Laplacian noise when empty.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub speech_files: Vec<PathBuf>,
    /// Measured RIRs, one WAV per microphone with one channel per source;
    /// synthetic RIRs when empty.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rir_files: Vec<PathBuf>,
}

impl Default for SceneSection {
    fn default() -> Self {
        let desk = SceneConfig::desk(2, 0);
        Self {
            sources: desk.sources,
            t60: desk.t60,
            drr_db: desk.drr_db,
            rir_length: desk.rir_length,
            snr_db: desk.snr_db,
            sample_rate: desk.sample_rate,
            duration_s: desk.duration_s,
            direct_delays: None,
            speech_files: Vec::new(),
            rir_files: Vec::new(),
        }
    }
}

impl SceneSection {
    pub fn scene(&self, seed: u64) -> SceneConfig {
        SceneConfig {
            sources: self.sources,
            t60: self.t60,
            direct_delays: self
                .direct_delays
                .clone()
                .unwrap_or_else(|| desk_delays(self.sources, self.sample_rate)),
            rir_length: self.rir_length,
            drr_db: self.drr_db,
            snr_db: self.snr_db,
            sample_rate: self.sample_rate,
            duration_s: self.duration_s,
            seed,
        }
    }

    pub fn source_kind(&self) -> SourceKind {
        if self.speech_files.is_empty() {
            SourceKind::LaplacianNoise
        } else {
            SourceKind::SpeechFiles(self.speech_files.clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowName {
    Hamming,
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftSection {
    pub window_length: usize,
    pub hop: usize,
    pub window: WindowName,
}

impl Default for StftSection {
    fn default() -> Self {
        Self {
            window_length: 2048,
            hop: 1024,
            window: WindowName::Hamming,
        }
    }
}

impl StftSection {
    pub fn stft(&self) -> ivasep::Result<StftConfig> {
        let kind = match self.window {
            WindowName::Hamming => WindowKind::Hamming,
            WindowName::Hann => WindowKind::Hann,
            WindowName::Rectangular => WindowKind::Rectangular,
        };
        StftConfig::new(self.window_length, self.hop, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Plain,
    QuasiNewton,
    Gradient,
    Squarem,
}

impl SchemeName {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeName::Plain => "plain",
            SchemeName::QuasiNewton => "quasi-newton",
            SchemeName::Gradient => "gradient",
            SchemeName::Squarem => "squarem",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SafeguardName {
    None,
    CostGuard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquaremFormName {
    Derivation,
    Algorithm3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquaremStepName {
    ResidualOverCurvature,
    CurvatureOverResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecantName {
    SingleMap,
    TwoMaps,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmSection {
    pub scheme: SchemeName,
    pub mu: f64,
    pub q: usize,
    pub safeguard: SafeguardName,
    pub epsilon_fp: f64,
    pub squarem_form: SquaremFormName,
    pub squarem_step: SquaremStepName,
    pub squarem_clamp: bool,
    pub secants: SecantName,
    pub phase_gauge: bool,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        let d = AccelConfig::default();
        Self {
            scheme: SchemeName::Plain,
            mu: d.mu,
            q: d.q,
            safeguard: SafeguardName::None,
            epsilon_fp: d.epsilon_fp,
            squarem_form: SquaremFormName::Derivation,
            squarem_step: SquaremStepName::ResidualOverCurvature,
            squarem_clamp: d.squarem_clamp,
            secants: SecantName::SingleMap,
            phase_gauge: d.phase_gauge,
        }
    }
}

impl AlgorithmSection {
    pub fn accel(&self) -> ivasep::Result<AccelConfig> {
        let cfg = AccelConfig {
            scheme: match self.scheme {
                SchemeName::Plain => Scheme::PlainMm,
                SchemeName::QuasiNewton => Scheme::QuasiNewton,
                SchemeName::Gradient => Scheme::Gradient,
                SchemeName::Squarem => Scheme::Squarem,
            },
            mu: self.mu,
            q: self.q,
            safeguard: match self.safeguard {
                SafeguardName::None => Safeguard::None,
                SafeguardName::CostGuard => Safeguard::CostGuard,
            },
            epsilon_fp: self.epsilon_fp,
            squarem_form: match self.squarem_form {
                SquaremFormName::Derivation => SquaremForm::Derivation,
                SquaremFormName::Algorithm3 => SquaremForm::Algorithm3,
            },
            squarem_step: match self.squarem_step {
                SquaremStepName::ResidualOverCurvature => SquaremStepLength::ResidualOverCurvature,
                SquaremStepName::CurvatureOverResidual => SquaremStepLength::CurvatureOverResidual,
            },
            squarem_clamp: self.squarem_clamp,
            secants: match self.secants {
                SecantName::SingleMap => SecantSource::SingleMap,
                SecantName::TwoMaps => SecantSource::TwoMaps,
                SecantName::Trajectory => SecantSource::Trajectory,
            },
            phase_gauge: self.phase_gauge,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationName {
    SearchAll,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub filter_length: usize,
    pub permutation: PermutationName,
    /// `[start, length]` in samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment: Option<[usize; 2]>,
    /// Microphone the outputs are projected back to before scoring.
    pub reference_mic: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            filter_length: 512,
            permutation: PermutationName::SearchAll,
            segment: None,
            reference_mic: 0,
        }
    }
}

impl EvaluationSection {
    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            filter_length: self.filter_length,
            segment: self.segment.map(|[s, l]| (s, l)),
            permutation: match self.permutation {
                PermutationName::SearchAll => PermutationMode::SearchAll,
                PermutationName::Fixed => PermutationMode::Fixed,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.iterations >= 1, "iterations must be at least 1");
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(self.eval_every >= 1, "eval_every must be at least 1");
        ensure!(
            self.evaluation.reference_mic < self.scene.sources,
            "reference_mic {} out of range for {} microphones",
            self.evaluation.reference_mic,
            self.scene.sources
        );
        self.scene.scene(self.seed_base).validate()?;
        self.stft.stft()?;
        self.algorithm.accel()?;
        self.evaluation.eval().validate(self.scene.sources)?;
        Ok(())
    }
}
