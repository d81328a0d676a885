use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ndarray::{s, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ivasep::accel::run;
use ivasep::eval::{Metrics, Scorer};
use ivasep::scene::{mix, synth_rir, synth_sources, MixingSystem};
use ivasep::separation::{cost, demix, projection_back, ContrastModel};
use ivasep::spectral::{analyze, synthesize, TimeSignal};

use crate::config::ExperimentConfig;
use crate::trace::{format_perm, mean_rows, write_atomic, write_csv, MeanRow, TraceRow};

/// Trace of one repetition.
#[derive(Debug, Clone)]
pub struct Repetition {
    pub rep: usize,
    pub seed: u64,
    /// Improvements over the unprocessed mixture.
    pub rows: Vec<TraceRow>,
    /// Absolute scores.
    pub absolute: Vec<TraceRow>,
    pub failure: Option<String>,
    pub iterations_run: usize,
    pub mm_evaluations: usize,
    pub wall_clock_s: f64,
    pub mm_time_s: f64,
}

impl Repetition {
    /// Optimizer time outside the MM map, per iteration.
    pub fn overhead_per_iteration_s(&self) -> f64 {
        if self.iterations_run == 0 {
            return 0.0;
        }
        (self.wall_clock_s - self.mm_time_s) / self.iterations_run as f64
    }
}

/// Runs repetition `rep` in memory. Errors end the trace with a failure
/// row instead of propagating.
pub fn run_repetition(config: &ExperimentConfig, rep: usize) -> Repetition {
    let seed = config.seed_base + rep as u64;
    let mut out = Repetition {
        rep,
        seed,
        rows: Vec::new(),
        absolute: Vec::new(),
        failure: None,
        iterations_run: 0,
        mm_evaluations: 0,
        wall_clock_s: 0.0,
        mm_time_s: 0.0,
    };
    if let Err(err) = trace_repetition(config, &mut out) {
        let message = format!("{err:#}");
        out.rows.push(TraceRow::failure(rep, &message));
        out.absolute.push(TraceRow::failure(rep, &message));
        out.failure = Some(message);
    }
    out
}

fn trace_repetition(config: &ExperimentConfig, out: &mut Repetition) -> anyhow::Result<()> {
    let scene = config.scene.scene(out.seed);
    let sources = synth_sources(
        scene.sources,
        scene.duration_s,
        scene.sample_rate,
        &config.scene.source_kind(),
        out.seed,
    )?;
    let system = if config.scene.rir_files.is_empty() {
        synth_rir(&scene)?
    } else {
        MixingSystem::from_wav_files(&config.scene.rir_files, scene.sample_rate)?
    };
    let mics = mix(&sources, &system, scene.snr_db, out.seed)?;
    let x = analyze(&mics, &config.stft.stft()?)?;
    let scorer = Scorer::with_baseline(&sources, &mics, &config.evaluation.eval())?;
    let model = ContrastModel::laplacian();
    let accel = config.algorithm.accel()?;

    let (iterations, every, rep) = (config.iterations, config.eval_every, out.rep);
    let reference = config.evaluation.reference_mic;
    let mut observer_error = None;
    let result = run(&x, &model, &accel, iterations, |info| {
        let record = info.record;
        if observer_error.is_some() || (record.iteration % every != 0 && record.iteration != iterations) {
            return;
        }
        let scored = (|| -> ivasep::Result<_> {
            let y = projection_back(info.demixing, &demix(info.demixing, &x)?, reference)?;
            let estimate = fit_length(&synthesize(&y)?, sources.len())?;
            Ok((scorer.score(&estimate)?, cost(info.demixing, &x, &model)?))
        })();
        let (card, cost_j) = match scored {
            Ok(v) => v,
            Err(e) => {
                observer_error = Some(e);
                return;
            }
        };
        let perm = format_perm(&card.permutation);
        for (k, o) in card.outputs.iter().enumerate() {
            let row = |m: &Metrics| TraceRow {
                rep,
                iter: record.iteration,
                mm_evals: record.mm_evaluations,
                wall_clock_s: record.elapsed.as_secs_f64(),
                cost_j,
                out_idx: Some(k),
                sdr_db: m.sdr_db,
                sir_db: m.sir_db,
                sar_db: m.sar_db,
                perm: perm.clone(),
            };
            out.rows.push(row(&o.improvement.expect("scorer has a baseline")));
            out.absolute.push(row(&o.metrics));
        }
    })?;
    if let Some(e) = observer_error {
        return Err(e.into());
    }
    let last = result.records.last().expect("at least one iteration");
    out.iterations_run = last.iteration;
    out.mm_evaluations = last.mm_evaluations;
    out.wall_clock_s = last.elapsed.as_secs_f64();
    out.mm_time_s = last.mm_time.as_secs_f64();
    Ok(())
}

/// Zero-pads or truncates every channel to `len` samples.
fn fit_length(signal: &TimeSignal, len: usize) -> ivasep::Result<TimeSignal> {
    let n = signal.len().min(len);
    let mut samples = Array2::zeros((signal.channels(), len));
    samples
        .slice_mut(s![.., ..n])
        .assign(&signal.samples().slice(s![.., ..n]));
    TimeSignal::new(samples, signal.sample_rate())
}

/// All repetitions, in parallel, in repetition order.
pub fn run_repetitions(config: &ExperimentConfig) -> Vec<Repetition> {
    (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(config, rep))
        .collect()
}

/// Per-repetition bookkeeping stored next to the traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub rep: usize,
    pub seed: u64,
    pub status: String,
    pub iterations_run: usize,
    pub mm_evaluations: usize,
    pub wall_clock_s: f64,
    pub mm_time_s: f64,
    pub overhead_per_iteration_s: f64,
}

/// `manifest.toml`: the configuration that produced a trace directory and
/// what happened in each repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    #[serde(rename = "repetition")]
    pub repetitions: Vec<RepetitionSummary>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.toml";

    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let path = dir.join(Self::FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub dir: PathBuf,
    pub repetitions: Vec<Repetition>,
    pub mean: Vec<MeanRow>,
    pub mean_absolute: Vec<MeanRow>,
}

pub fn rep_file(rep: usize) -> String {
    format!("rep_{rep:03}.csv")
}

pub fn rep_absolute_file(rep: usize) -> String {
    format!("rep_{rep:03}_absolute.csv")
}

pub const MEAN_FILE: &str = "mean.csv";
pub const MEAN_ABSOLUTE_FILE: &str = "mean_absolute.csv";

/// Runs every repetition and writes, under `config.output_path`, one trace
/// pair per repetition (improvements and absolute scores), their means and
/// a manifest.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<ExperimentOutput> {
    config.validate()?;
    let dir = config.output_path.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let repetitions: Vec<Repetition> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let r = run_repetition(config, rep);
            write_csv(&dir.join(rep_file(rep)), &r.rows)?;
            write_csv(&dir.join(rep_absolute_file(rep)), &r.absolute)?;
            Ok(r)
        })
        .collect::<anyhow::Result<_>>()?;

    let rows: Vec<&[TraceRow]> = repetitions.iter().map(|r| r.rows.as_slice()).collect();
    let mean = mean_rows(&rows);
    let abs: Vec<&[TraceRow]> = repetitions.iter().map(|r| r.absolute.as_slice()).collect();
    let mean_absolute = mean_rows(&abs);
    write_csv(&dir.join(MEAN_FILE), &mean)?;
    write_csv(&dir.join(MEAN_ABSOLUTE_FILE), &mean_absolute)?;

    let manifest = Manifest {
        config: config.clone(),
        repetitions: repetitions
            .iter()
            .map(|r| RepetitionSummary {
                rep: r.rep,
                seed: r.seed,
                status: match &r.failure {
                    Some(m) => format!("failed: {m}"),
                    None => "ok".into(),
                },
                iterations_run: r.iterations_run,
                mm_evaluations: r.mm_evaluations,
                wall_clock_s: r.wall_clock_s,
                mm_time_s: r.mm_time_s,
                overhead_per_iteration_s: r.overhead_per_iteration_s(),
            })
            .collect(),
    };
    let text = toml::to_string_pretty(&manifest).context("serializing manifest")?;
    write_atomic(&dir.join(Manifest::FILE), text.as_bytes())?;

    Ok(ExperimentOutput {
        dir,
        repetitions,
        mean,
        mean_absolute,
    })
}
