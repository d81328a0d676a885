//! Real FFT helpers for linear convolution and correlation.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

/// Forward/inverse real FFT pair of a fixed length.
pub(crate) struct FftPlan {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// Smallest power of two holding a linear result of `n` samples.
    pub fn for_linear(n: usize) -> Self {
        Self::new(n.next_power_of_two().max(2))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Spectrum of `x` zero-padded (or truncated) to the plan length.
    pub fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![0.0; self.len];
        let n = x.len().min(self.len);
        buf[..n].copy_from_slice(&x[..n]);
        let mut out = self.forward.make_output_vec();
        self.forward
            .process(&mut buf, &mut out)
            .expect("buffer sizes come from the plan");
        out
    }

    /// Inverse transform scaled by `1 / len`.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        spectrum[0].im = 0.0;
        if self.len.is_multiple_of(2) {
            let last = spectrum.len() - 1;
            spectrum[last].im = 0.0;
        }
        let mut out = self.inverse.make_output_vec();
        self.inverse
            .process(&mut spectrum, &mut out)
            .expect("buffer sizes come from the plan");
        let scale = 1.0 / self.len as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }
}

/// Linear convolution `a * b` truncated to its first `out_len` samples.
pub(crate) fn convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0; out_len];
    }
    let plan = FftPlan::for_linear(a.len() + b.len() - 1);
    let fa = plan.forward(a);
    let fb = plan.forward(b);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = plan.inverse(prod);
    out.resize(out_len.max(out.len()), 0.0);
    out.truncate(out_len);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_matches_direct_sum() {
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = [0.25, 1.0, -1.0];
        let direct: Vec<f64> = (0..6)
            .map(|n| {
                (0..3)
                    .filter(|k| n >= *k && n - k < 4)
                    .map(|k| b[k] * a[n - k])
                    .sum()
            })
            .collect();
        let fast = convolve(&a, &b, 6);
        for (x, y) in fast.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(convolve(&a, &b, 3).len(), 3);
        assert_eq!(convolve(&a, &b, 9)[8], 0.0);
    }
}
