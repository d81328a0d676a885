use ndarray::{Array1, Array3, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral::Spectrogram;

/// Per-bin square demixing matrices `W_f`, stored as `[bins, K, K]`.
///
/// Row `k` of `W_f` is `w_{k,f}^H`, so output `k` at bin `f` is the row
/// times the observation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DemixingSystem {
    matrices: Array3<Complex64>,
}

impl DemixingSystem {
    pub fn new(matrices: Array3<Complex64>) -> Result<Self> {
        let (bins, rows, cols) = matrices.dim();
        if rows != cols || rows == 0 || bins == 0 {
            return Err(Error::DimensionMismatch(format!(
                "demixing matrices must be non-empty and square, got [{bins}, {rows}, {cols}]"
            )));
        }
        if matrices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidConfig("demixing matrices must be finite".into()));
        }
        Ok(Self { matrices })
    }

    pub fn identity(channels: usize, bins: usize) -> Self {
        let mut m = Array3::zeros((bins, channels, channels));
        for f in 0..bins {
            for k in 0..channels {
                m[[f, k, k]] = Complex64::new(1.0, 0.0);
            }
        }
        Self { matrices: m }
    }

    pub fn channels(&self) -> usize {
        self.matrices.dim().1
    }

    pub fn bins(&self) -> usize {
        self.matrices.dim().0
    }

    pub fn matrices(&self) -> &Array3<Complex64> {
        &self.matrices
    }

    pub(crate) fn matrices_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.matrices
    }

    pub fn matrix(&self, bin: usize) -> ArrayView2<'_, Complex64> {
        self.matrices.index_axis(ndarray::Axis(0), bin)
    }

    /// Length of the stacked vector: `K * K * F`.
    pub fn stacked_len(&self) -> usize {
        self.matrices.len()
    }

    /// Concatenation of the demixing vectors `w_{k,f}` (not their conjugate
    /// rows), output-major then bin: entry `(k * F + f) * K + c` is
    /// `w_{k,f}[c]`.
    pub fn stack(&self) -> Array1<Complex64> {
        let (bins, k_max, _) = self.matrices.dim();
        let mut v = Array1::zeros(self.matrices.len());
        for k in 0..k_max {
            for f in 0..bins {
                for c in 0..k_max {
                    v[(k * bins + f) * k_max + c] = self.matrices[[f, k, c]].conj();
                }
            }
        }
        v
    }

    /// Inverse of [`DemixingSystem::stack`].
    pub fn unstack(v: &Array1<Complex64>, channels: usize, bins: usize) -> Result<Self> {
        if v.len() != channels * channels * bins {
            return Err(Error::DimensionMismatch(format!(
                "stacked vector has length {}, expected {}",
                v.len(),
                channels * channels * bins
            )));
        }
        let mut m = Array3::zeros((bins, channels, channels));
        for k in 0..channels {
            for f in 0..bins {
                for c in 0..channels {
                    m[[f, k, c]] = v[(k * bins + f) * channels + c].conj();
                }
            }
        }
        Self::new(m)
    }

    /// Rotates every row so that its diagonal entry is real and
    /// non-negative. Outputs, magnitudes and the cost are unchanged; this
    /// removes the per-bin phase freedom of the rows, along which the MM map
    /// is neutral.
    pub fn fix_phase(&mut self) {
        let (bins, n, _) = self.matrices.dim();
        for f in 0..bins {
            for k in 0..n {
                let d = self.matrices[[f, k, k]];
                if d.im == 0.0 && d.re >= 0.0 {
                    continue;
                }
                let mag = d.norm();
                let rot = d.conj() / mag;
                for c in 0..n {
                    self.matrices[[f, k, c]] *= rot;
                }
                self.matrices[[f, k, k]] = Complex64::new(mag, 0.0);
            }
        }
    }

    /// Reorders output rows: new row `i` is old row `order[i]` in every bin.
    pub fn permute_outputs(&self, order: &[usize]) -> Self {
        let mut m = self.matrices.clone();
        for f in 0..self.bins() {
            for (i, &src) in order.iter().enumerate() {
                for c in 0..self.channels() {
                    m[[f, i, c]] = self.matrices[[f, src, c]];
                }
            }
        }
        Self { matrices: m }
    }
}

/// Applies `y_{f,t} = W_f x_{f,t}` to every bin and frame.
pub fn demix(w: &DemixingSystem, x: &Spectrogram) -> Result<Spectrogram> {
    let (channels, bins, frames) = x.data().dim();
    if channels != w.channels() || bins != w.bins() {
        return Err(Error::DimensionMismatch(format!(
            "demixing system is {}x{} over {} bins, spectrogram has {channels} channels and {bins} bins",
            w.channels(),
            w.channels(),
            w.bins()
        )));
    }
    let mut y = Array3::zeros((channels, bins, frames));
    let xd = x.data();
    for f in 0..bins {
        for k in 0..channels {
            for c in 0..channels {
                let coeff = w.matrices[[f, k, c]];
                for t in 0..frames {
                    y[[k, f, t]] += coeff * xd[[c, f, t]];
                }
            }
        }
    }
    x.with_data(y)
}

/// Minimal-distortion rescaling of demixed outputs to microphone
/// `reference`: output `k` at bin `f` is multiplied by `(W_f^{-1})[reference, k]`.
///
/// Evaluation-time only; the optimizer never sees rescaled outputs.
pub fn projection_back(w: &DemixingSystem, y: &Spectrogram, reference: usize) -> Result<Spectrogram> {
    let k_max = w.channels();
    if reference >= k_max || y.channels() != k_max || y.bins() != w.bins() {
        return Err(Error::DimensionMismatch(
            "projection-back reference or dimensions out of range".into(),
        ));
    }
    let mut data = y.data().clone();
    for f in 0..w.bins() {
        let wf: Vec<Complex64> = w.matrix(f).iter().cloned().collect();
        for k in 0..k_max {
            let mut a = wf.clone();
            let mut col = vec![Complex64::default(); k_max];
            col[k] = Complex64::new(1.0, 0.0);
            linalg::solve_in_place(&mut a, &mut col, k_max)
                .map_err(|_| Error::SingularDemixing { bin: f })?;
            let gain = col[reference];
            data.index_axis_mut(ndarray::Axis(0), k)
                .index_axis_mut(ndarray::Axis(0), f)
                .mapv_inplace(|v| v * gain);
        }
    }
    y.with_data(data)
}
