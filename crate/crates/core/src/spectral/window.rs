use std::f64::consts::PI;

/// Analysis/synthesis window shape. Hamming and Hann are periodic
/// (DFT-even), so shifted copies at half the length sum to a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hamming,
    Hann,
    Rectangular,
}

/// Samples of the window of length `n`.
pub fn window(kind: WindowKind, n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|i| {
            let phase = 2.0 * PI * i as f64 / nf;
            match kind {
                WindowKind::Hamming => 0.54 - 0.46 * phase.cos(),
                WindowKind::Hann => 0.5 - 0.5 * phase.cos(),
                WindowKind::Rectangular => 1.0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_half_overlap_sums_to_constant() {
        let n = 2048;
        let w = window(WindowKind::Hamming, n);
        let hop = n / 2;
        for i in 0..hop {
            assert!((w[i] + w[i + hop] - 1.08).abs() < 1e-12, "n = {i}");
        }
    }

    #[test]
    fn hann_half_overlap_sums_to_one() {
        let w = window(WindowKind::Hann, 64);
        for i in 0..32 {
            assert!((w[i] + w[i + 32] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_endpoints() {
        let w = window(WindowKind::Hamming, 16);
        assert!((w[0] - 0.08).abs() < 1e-15);
        assert!((w[8] - 1.0).abs() < 1e-15);
    }
}
