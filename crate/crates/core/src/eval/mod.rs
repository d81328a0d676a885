//! BSS-Eval source metrics (SDR, SIR, SAR) with output-to-source alignment.
//!
//! An estimate is projected onto the span of time-shifted copies
//! (`0..filter_length` samples) of the references. The part explained by
//! its own source is the target; the rest of the joint projection is
//! interference; what no reference explains is artifact.

mod bss;

pub use bss::{BssEval, Decomposition, Metrics, DB_CAP};

use crate::error::{Error, Result};
use crate::spectral::TimeSignal;

/// Largest source count for which every assignment is tried.
pub const MAX_SEARCH_SOURCES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermutationMode {
    /// Try all `K!` assignments and keep the one with the best mean SIR.
    #[default]
    SearchAll,
    /// Output `k` is scored against source `k`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub filter_length: usize,
    /// Only score samples `start..start + len`.
    pub segment: Option<(usize, usize)>,
    pub permutation: PermutationMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            filter_length: 512,
            segment: None,
            permutation: PermutationMode::SearchAll,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self, sources: usize) -> Result<()> {
        if self.filter_length == 0 {
            return Err(Error::InvalidConfig("filter length must be at least 1".into()));
        }
        if self.permutation == PermutationMode::SearchAll && sources > MAX_SEARCH_SOURCES {
            return Err(Error::InvalidConfig(format!(
                "permutation search supports at most {MAX_SEARCH_SOURCES} sources, got {sources}"
            )));
        }
        Ok(())
    }

    fn crop(&self, signal: &TimeSignal) -> Result<TimeSignal> {
        match self.segment {
            Some((start, len)) => signal.segment(start, len),
            None => Ok(signal.clone()),
        }
    }
}

/// Scores of one output against the source it was assigned to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputScore {
    pub source: usize,
    pub metrics: Metrics,
    /// Gain over the unprocessed mixture for the same source.
    pub improvement: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCard {
    /// Indexed by output.
    pub outputs: Vec<OutputScore>,
    /// `permutation[k]` is the source assigned to output `k`.
    pub permutation: Vec<usize>,
}

impl ScoreCard {
    /// Mean of `field` over outputs.
    pub fn mean(&self, field: impl Fn(&Metrics) -> f64) -> f64 {
        self.outputs.iter().map(|o| field(&o.metrics)).sum::<f64>() / self.outputs.len() as f64
    }

    /// Mean of `field` over output improvements, if a baseline was set.
    pub fn mean_improvement(&self, field: impl Fn(&Metrics) -> f64) -> Option<f64> {
        let sum = self
            .outputs
            .iter()
            .map(|o| o.improvement.as_ref().map(&field))
            .sum::<Option<f64>>()?;
        Some(sum / self.outputs.len() as f64)
    }
}

/// Decomposes a single-channel `estimate` against `references`, with
/// source `target` as the wanted one.
pub fn decompose(
    estimate: &[f64],
    references: &TimeSignal,
    target: usize,
    filter_length: usize,
) -> Result<Decomposition> {
    BssEval::new(references, filter_length)?.decompose(estimate, target)
}

/// Scores `estimates` against `references` without a mixture baseline.
pub fn score(estimates: &TimeSignal, references: &TimeSignal, config: &EvalConfig) -> Result<ScoreCard> {
    Scorer::new(references, config)?.score(estimates)
}

/// Reusable scorer for one reference set, optionally reporting improvements
/// over the unprocessed mixtures.
pub struct Scorer {
    engine: BssEval,
    config: EvalConfig,
    baseline: Option<Vec<Metrics>>,
}

impl Scorer {
    pub fn new(references: &TimeSignal, config: &EvalConfig) -> Result<Self> {
        config.validate(references.channels())?;
        let refs = config.crop(references)?;
        Ok(Self {
            engine: BssEval::new(&refs, config.filter_length)?,
            config: *config,
            baseline: None,
        })
    }

    /// Like [`Scorer::new`], with the mixtures scored once (all assignments
    /// searched) as the per-source baseline for improvements.
    pub fn with_baseline(
        references: &TimeSignal,
        mixtures: &TimeSignal,
        config: &EvalConfig,
    ) -> Result<Self> {
        let mut scorer = Self::new(references, config)?;
        let card = scorer.score_with(mixtures, PermutationMode::SearchAll)?;
        let mut baseline = vec![None; references.channels()];
        for o in &card.outputs {
            baseline[o.source] = Some(o.metrics);
        }
        scorer.baseline = Some(baseline.into_iter().map(Option::unwrap).collect());
        Ok(scorer)
    }

    pub fn baseline(&self) -> Option<&[Metrics]> {
        self.baseline.as_deref()
    }

    pub fn score(&self, estimates: &TimeSignal) -> Result<ScoreCard> {
        let mut card = self.score_with(estimates, self.config.permutation)?;
        if let Some(base) = &self.baseline {
            for o in &mut card.outputs {
                o.improvement = Some(o.metrics - base[o.source]);
            }
        }
        Ok(card)
    }

    fn score_with(&self, estimates: &TimeSignal, mode: PermutationMode) -> Result<ScoreCard> {
        let k = self.engine.sources();
        if estimates.channels() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} estimates for {k} references",
                estimates.channels()
            )));
        }
        let est = self.config.crop(estimates)?;
        // metrics[e][j]: estimate e scored against source j.
        let metrics = (0..k)
            .map(|e| {
                let parts = self.engine.decompose_all(&est.channel(e).to_vec())?;
                Ok(parts.iter().map(Decomposition::metrics).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;

        let permutation = match mode {
            PermutationMode::Fixed => (0..k).collect(),
            PermutationMode::SearchAll => {
                let mean_sir =
                    |p: &[usize]| p.iter().enumerate().map(|(e, &j)| metrics[e][j].sir_db).sum::<f64>();
                let mut best: Vec<usize> = (0..k).collect();
                let mut best_sir = mean_sir(&best);
                let mut p = best.clone();
                while next_permutation(&mut p) {
                    let sir = mean_sir(&p);
                    if sir > best_sir {
                        best_sir = sir;
                        best = p.clone();
                    }
                }
                best
            }
        };
        Ok(ScoreCard {
            outputs: permutation
                .iter()
                .enumerate()
                .map(|(e, &j)| OutputScore {
                    source: j,
                    metrics: metrics[e][j],
                    improvement: None,
                })
                .collect(),
            permutation,
        })
    }
}

/// Advances `p` to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
