use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use ndarray::Array1;
use num_complex::Complex64;

use crate::dsp::FftPlan;
use crate::error::{Error, Result};
use crate::spectral::TimeSignal;

/// Relative Tikhonov loading of the delayed-copies Gram matrices.
const JITTER: f64 = 1e-12;

/// An estimate split into target, interference and artifact parts. All
/// three have length `samples + filter_length - 1` and sum to the
/// zero-padded estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub s_target: Array1<f64>,
    pub e_interf: Array1<f64>,
    pub e_artif: Array1<f64>,
}

/// SDR, SIR and SAR in dB, clamped to `[-100, 100]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub sdr_db: f64,
    pub sir_db: f64,
    pub sar_db: f64,
}

pub const DB_CAP: f64 = 100.0;

fn ratio_db(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        -DB_CAP
    } else if den == 0.0 {
        DB_CAP
    } else {
        (10.0 * (num / den).log10()).clamp(-DB_CAP, DB_CAP)
    }
}

impl Decomposition {
    pub fn metrics(&self) -> Metrics {
        let energy = |v: &Array1<f64>| v.dot(v);
        let target = energy(&self.s_target);
        let distortion = energy(&(&self.e_interf + &self.e_artif));
        Metrics {
            sdr_db: ratio_db(target, distortion),
            sir_db: ratio_db(target, energy(&self.e_interf)),
            sar_db: ratio_db(
                energy(&(&self.s_target + &self.e_interf)),
                energy(&self.e_artif),
            ),
        }
    }
}

impl std::ops::Sub for Metrics {
    type Output = Metrics;

    fn sub(self, rhs: Metrics) -> Metrics {
        Metrics {
            sdr_db: self.sdr_db - rhs.sdr_db,
            sir_db: self.sir_db - rhs.sir_db,
            sar_db: self.sar_db - rhs.sar_db,
        }
    }
}

/// Projection engine for a fixed reference set. The Gram matrices of the
/// delayed references are factored once and reused for every estimate.
pub struct BssEval {
    samples: usize,
    filter_length: usize,
    plan: FftPlan,
    spectra: Vec<Vec<Complex64>>,
    all: Cholesky<f64, Dyn>,
    own: Vec<Cholesky<f64, Dyn>>,
}

impl BssEval {
    pub fn new(references: &TimeSignal, filter_length: usize) -> Result<Self> {
        if filter_length == 0 {
            return Err(Error::InvalidConfig("filter length must be at least 1".into()));
        }
        let (k, n, l) = (references.channels(), references.len(), filter_length);
        if n == 0 {
            return Err(Error::DegenerateReferences("references are empty".into()));
        }
        let plan = FftPlan::for_linear(n + l - 1);
        let spectra: Vec<_> = (0..k)
            .map(|i| plan.forward(&references.channel(i).to_vec()))
            .collect();

        // lags[i][j][L - 1 + d] = sum_m r_i[m] r_j[m + d] for |d| < L.
        let m = plan.len();
        let mut gram = DMatrix::<f64>::zeros(k * l, k * l);
        for i in 0..k {
            for j in i..k {
                let corr = plan.inverse(cross_spectrum(&spectra[i], &spectra[j]));
                let lag = |d: isize| corr[d.rem_euclid(m as isize) as usize];
                for tau in 0..l {
                    for sigma in 0..l {
                        let v = lag(tau as isize - sigma as isize);
                        gram[(i * l + tau, j * l + sigma)] = v;
                        gram[(j * l + sigma, i * l + tau)] = v;
                    }
                }
            }
        }
        let own = (0..k)
            .map(|i| {
                let block = gram.view((i * l, i * l), (l, l)).into_owned();
                factor(block, &format!("reference {i}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let all = factor(gram, "reference set")?;
        Ok(Self {
            samples: n,
            filter_length: l,
            plan,
            spectra,
            all,
            own,
        })
    }

    pub fn sources(&self) -> usize {
        self.spectra.len()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn filter_length(&self) -> usize {
        self.filter_length
    }

    /// Decomposes `estimate` against every reference in turn.
    pub fn decompose_all(&self, estimate: &[f64]) -> Result<Vec<Decomposition>> {
        if estimate.len() != self.samples {
            return Err(Error::DimensionMismatch(format!(
                "estimate has {} samples, references {}",
                estimate.len(),
                self.samples
            )));
        }
        let (k, l) = (self.sources(), self.filter_length);
        let out_len = self.samples + l - 1;
        let est_spec = self.plan.forward(estimate);
        let corr: Vec<Vec<f64>> = self
            .spectra
            .iter()
            .map(|r| self.plan.inverse(cross_spectrum(r, &est_spec)))
            .collect();
        let rhs = DVector::from_iterator(k * l, corr.iter().flat_map(|c| c[..l].iter().copied()));

        let coeffs = self.all.solve(&rhs);
        let p_all = self.filter_sum(0..k, |i, tau| coeffs[i * l + tau], out_len);
        let mut padded = Array1::zeros(out_len);
        padded
            .slice_mut(ndarray::s![..self.samples])
            .assign(&ndarray::ArrayView1::from(estimate));
        let e_artif = &padded - &p_all;

        Ok((0..k)
            .map(|j| {
                let own = self.own[j].solve(&rhs.rows(j * l, l).into_owned());
                let s_target = self.filter_sum(j..j + 1, |_, tau| own[tau], out_len);
                Decomposition {
                    e_interf: &p_all - &s_target,
                    s_target,
                    e_artif: e_artif.clone(),
                }
            })
            .collect())
    }

    pub fn decompose(&self, estimate: &[f64], target: usize) -> Result<Decomposition> {
        if target >= self.sources() {
            return Err(Error::DimensionMismatch(format!(
                "target {target} out of {} references",
                self.sources()
            )));
        }
        Ok(self.decompose_all(estimate)?.swap_remove(target))
    }

    /// `sum_i (r_i * c_i)` over `refs`, the first `out_len` samples.
    fn filter_sum(
        &self,
        refs: std::ops::Range<usize>,
        coeff: impl Fn(usize, usize) -> f64,
        out_len: usize,
    ) -> Array1<f64> {
        let mut acc = vec![Complex64::default(); self.spectra[0].len()];
        for i in refs {
            let taps: Vec<f64> = (0..self.filter_length).map(|tau| coeff(i, tau)).collect();
            let c = self.plan.forward(&taps);
            for ((a, r), h) in acc.iter_mut().zip(&self.spectra[i]).zip(&c) {
                *a += r * h;
            }
        }
        let mut y = self.plan.inverse(acc);
        y.truncate(out_len);
        Array1::from(y)
    }
}

fn cross_spectrum(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).collect()
}

fn factor(mut gram: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let n = gram.nrows();
    let trace = gram.trace();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::DegenerateReferences(format!("{what} has no energy")));
    }
    let jitter = JITTER * trace;
    for i in 0..n {
        gram[(i, i)] += jitter;
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::DegenerateReferences(format!("{what} is not positive definite")))?;
    let l = chol.l_dirty();
    let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot < 10.0 * jitter {
        return Err(Error::DegenerateReferences(format!(
            "{what} spans a rank-deficient subspace"
        )));
    }
    Ok(chol)
}
