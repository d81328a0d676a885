use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::experiment::{Manifest, MEAN_FILE};
use crate::trace::{read_csv, MeanRow};

/// Fraction of the final mean SIR improvement that counts as "converged".
pub const MARK_FRACTION: f64 = 0.9;

/// First row whose mean SIR improvement reaches `MARK_FRACTION` of the last
/// row's. `None` when the final improvement is not positive.
pub fn ninety_percent_mark(mean: &[MeanRow]) -> Option<&MeanRow> {
    let last = mean.last()?;
    if !(last.sir_db > 0.0) {
        return None;
    }
    let target = MARK_FRACTION * last.sir_db;
    mean.iter().find(|r| r.sir_db >= target)
}

/// Summary of one trace directory.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub dir: PathBuf,
    pub label: String,
    pub repetitions_ok: usize,
    pub final_sdr_db: f64,
    pub final_sir_db: f64,
    pub mark_iteration: Option<usize>,
    pub mark_mm_evals: Option<f64>,
    pub mark_wall_clock_s: Option<f64>,
    /// MM evaluations to the mark relative to the first trace compared.
    pub mm_evals_ratio: Option<f64>,
    pub overhead_per_iteration_s: f64,
}

/// Loaded trace directory.
#[derive(Debug, Clone)]
pub struct Trace {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub mean: Vec<MeanRow>,
}

impl Trace {
    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let manifest = Manifest::load(dir)?;
        let mean = read_csv(&dir.join(MEAN_FILE)).with_context(|| format!("loading {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            mean,
        })
    }

    /// Scheme with its parameters, e.g. `gradient(mu=-1.8)`.
    pub fn label(&self) -> String {
        let a = &self.manifest.config.algorithm;
        match a.scheme {
            crate::config::SchemeName::Gradient => format!("gradient(mu={})", a.mu),
            crate::config::SchemeName::QuasiNewton => format!("quasi-newton(q={})", a.q),
            other => other.as_str().to_string(),
        }
    }

    fn comparable_with(&self, other: &Trace) -> anyhow::Result<()> {
        let (a, b) = (&self.manifest.config, &other.manifest.config);
        let mut diffs = Vec::new();
        if a.scene != b.scene {
            diffs.push("scene");
        }
        if a.stft != b.stft {
            diffs.push("stft");
        }
        if a.evaluation != b.evaluation {
            diffs.push("evaluation");
        }
        if a.seed_base != b.seed_base || a.repetitions != b.repetitions {
            diffs.push("seeds");
        }
        anyhow::ensure!(
            diffs.is_empty(),
            "traces not comparable: {} and {} differ in {}",
            self.dir.display(),
            other.dir.display(),
            diffs.join(", ")
        );
        Ok(())
    }

    fn overhead_per_iteration_s(&self) -> f64 {
        let ok: Vec<f64> = self
            .manifest
            .repetitions
            .iter()
            .filter(|r| r.status == "ok")
            .map(|r| r.overhead_per_iteration_s)
            .collect();
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        }
    }
}

/// Summarizes traces produced on the same scenes; the first is the
/// reference for the ratio column.
pub fn compare(traces: &[Trace]) -> anyhow::Result<Vec<TraceSummary>> {
    anyhow::ensure!(traces.len() >= 2, "need at least two trace directories");
    for t in &traces[1..] {
        traces[0].comparable_with(t)?;
    }
    let mut out: Vec<TraceSummary> = traces
        .iter()
        .map(|t| {
            let last = t.mean.last();
            let mark = ninety_percent_mark(&t.mean);
            TraceSummary {
                dir: t.dir.clone(),
                label: t.label(),
                repetitions_ok: last.and_then(|r| r.perm.parse().ok()).unwrap_or(0),
                final_sdr_db: last.map_or(f64::NAN, |r| r.sdr_db),
                final_sir_db: last.map_or(f64::NAN, |r| r.sir_db),
                mark_iteration: mark.map(|r| r.iter),
                mark_mm_evals: mark.map(|r| r.mm_evals),
                mark_wall_clock_s: mark.map(|r| r.wall_clock_s),
                mm_evals_ratio: None,
                overhead_per_iteration_s: t.overhead_per_iteration_s(),
            }
        })
        .collect();
    let reference = out[0].mark_mm_evals;
    for s in &mut out {
        s.mm_evals_ratio = match (s.mark_mm_evals, reference) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
    }
    Ok(out)
}

pub fn load_and_compare(dirs: &[PathBuf]) -> anyhow::Result<Vec<TraceSummary>> {
    let traces = dirs.iter().map(|d| Trace::load(d)).collect::<anyhow::Result<Vec<_>>>()?;
    compare(&traces)
}

/// Fixed-width text table, one line per trace.
pub fn render(summaries: &[TraceSummary]) -> String {
    let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
    let mut s = format!(
        "{:<24} {:>4} {:>9} {:>9} {:>6} {:>9} {:>10} {:>7} {:>12}\n",
        "trace", "reps", "SDRi_dB", "SIRi_dB", "iter90", "evals90", "wall90_s", "ratio", "overhead_ms"
    );
    for t in summaries {
        let _ = writeln!(
            s,
            "{:<24} {:>4} {:>9.2} {:>9.2} {:>6} {:>9} {:>10} {:>7} {:>12.3}",
            t.label,
            t.repetitions_ok,
            t.final_sdr_db,
            t.final_sir_db,
            t.mark_iteration.map_or("-".to_string(), |i| i.to_string()),
            opt(t.mark_mm_evals, 1),
            opt(t.mark_wall_clock_s, 3),
            opt(t.mm_evals_ratio, 3),
            1e3 * t.overhead_per_iteration_s,
        );
    }
    s
}
