use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Header shared by every trace file.
pub const HEADER: &str = "rep,iter,mm_evals,wall_clock_s,cost_J,out_idx,sdr_db,sir_db,sar_db,perm";

/// One output at one evaluated iteration. A failed repetition ends with a
/// row whose `out_idx` is empty, whose numbers are NaN and whose `perm`
/// starts with `failed:`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub rep: usize,
    pub iter: usize,
    pub mm_evals: usize,
    pub wall_clock_s: f64,
    #[serde(rename = "cost_J")]
    pub cost_j: f64,
    pub out_idx: Option<usize>,
    pub sdr_db: f64,
    pub sir_db: f64,
    pub sar_db: f64,
    /// Source assigned to each output, `;`-separated.
    pub perm: String,
}

impl TraceRow {
    pub fn failure(rep: usize, message: &str) -> Self {
        Self {
            rep,
            iter: 0,
            mm_evals: 0,
            wall_clock_s: f64::NAN,
            cost_j: f64::NAN,
            out_idx: None,
            sdr_db: f64::NAN,
            sir_db: f64::NAN,
            sar_db: f64::NAN,
            perm: format!("failed: {}", message.replace(['\n', '\r'], " ")),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.out_idx.is_none()
    }
}

pub fn format_perm(perm: &[usize]) -> String {
    perm.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

/// Average over repetitions and outputs at one iteration, as plotted. Same
/// header as [`TraceRow`] with `rep = "mean"` and `out_idx = "all"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub rep: String,
    pub iter: usize,
    pub mm_evals: f64,
    pub wall_clock_s: f64,
    #[serde(rename = "cost_J")]
    pub cost_j: f64,
    pub out_idx: String,
    pub sdr_db: f64,
    pub sir_db: f64,
    pub sar_db: f64,
    /// Number of repetitions averaged.
    pub perm: String,
}

/// Mean rows over the repetitions that did not fail. Iterations are those
/// present in every such repetition.
pub fn mean_rows(repetitions: &[&[TraceRow]]) -> Vec<MeanRow> {
    let ok: Vec<&[TraceRow]> = repetitions
        .iter()
        .copied()
        .filter(|rows| !rows.iter().any(TraceRow::is_failure))
        .collect();
    let Some(first) = ok.first() else {
        return Vec::new();
    };
    let mut iters: Vec<usize> = first.iter().map(|r| r.iter).collect();
    iters.dedup();
    iters
        .into_iter()
        .filter_map(|iter| {
            let per_rep: Vec<Vec<&TraceRow>> = ok
                .iter()
                .map(|rows| rows.iter().filter(|r| r.iter == iter).collect())
                .collect();
            if per_rep.iter().any(Vec::is_empty) {
                return None;
            }
            let n = per_rep.len() as f64;
            let rep_mean = |f: &dyn Fn(&TraceRow) -> f64| {
                per_rep.iter().map(|rows| f(rows[0])).sum::<f64>() / n
            };
            let out_mean = |f: &dyn Fn(&TraceRow) -> f64| {
                per_rep
                    .iter()
                    .map(|rows| rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64)
                    .sum::<f64>()
                    / n
            };
            Some(MeanRow {
                rep: "mean".into(),
                iter,
                mm_evals: rep_mean(&|r| r.mm_evals as f64),
                wall_clock_s: rep_mean(&|r| r.wall_clock_s),
                cost_j: rep_mean(&|r| r.cost_j),
                out_idx: "all".into(),
                sdr_db: out_mean(&|r| r.sdr_db),
                sir_db: out_mean(&|r| r.sir_db),
                sar_db: out_mean(&|r| r.sar_db),
                perm: per_rep.len().to_string(),
            })
        })
        .collect()
}

/// Serializes `rows` under [`HEADER`] and moves the file into place in one
/// rename, so readers never see a partial trace.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    let mut text = format!("{HEADER}\n").into_bytes();
    text.extend_from_slice(&buf);
    write_atomic(path, &text)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    anyhow::ensure!(header == HEADER, "{}: unexpected header {header:?}", path.display());
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("reading {}", path.display()))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    file.write_all(bytes)?;
    file.sync_all()?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
