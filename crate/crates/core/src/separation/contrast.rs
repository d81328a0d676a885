use crate::error::{Error, Result};

/// Spherical super-Gaussian source prior, `G(r) = -log p(y)` up to a
/// constant, as a function of the broadband magnitude `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourcePrior {
    /// `G(r) = r`.
    Laplacian,
    /// `G(r) = r^shape` with `0 < shape <= 2`.
    GeneralizedGaussian { shape: f64 },
}

/// Source model used by the MM updates: the contrast `G`, its weight
/// `phi(r) = G'(r) / r`, and a relative floor on `r`.
///
/// The floor for output `k` is `floor_ratio` times the mean magnitude of
/// that output over all frames; `phi` is evaluated at `max(r, floor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastModel {
    prior: SourcePrior,
    floor_ratio: f64,
}

impl Default for ContrastModel {
    fn default() -> Self {
        Self {
            prior: SourcePrior::Laplacian,
            floor_ratio: 1e-8,
        }
    }
}

impl ContrastModel {
    pub fn laplacian() -> Self {
        Self::default()
    }

    pub fn new(prior: SourcePrior, floor_ratio: f64) -> Result<Self> {
        if let SourcePrior::GeneralizedGaussian { shape } = prior {
            if !(shape > 0.0 && shape <= 2.0) {
                return Err(Error::InvalidConfig(format!(
                    "generalized Gaussian shape must lie in (0, 2], got {shape}"
                )));
            }
        }
        if !(floor_ratio >= 0.0) || !floor_ratio.is_finite() {
            return Err(Error::InvalidConfig("magnitude floor must be finite and >= 0".into()));
        }
        Ok(Self { prior, floor_ratio })
    }

    pub fn prior(&self) -> SourcePrior {
        self.prior
    }

    pub fn floor_ratio(&self) -> f64 {
        self.floor_ratio
    }

    /// `G(r)`.
    pub fn contrast(&self, r: f64) -> f64 {
        match self.prior {
            SourcePrior::Laplacian => r,
            SourcePrior::GeneralizedGaussian { shape } => r.powf(shape),
        }
    }

    /// `G'(r) / r` without flooring.
    pub fn weight_unfloored(&self, r: f64) -> f64 {
        match self.prior {
            SourcePrior::Laplacian => 1.0 / r,
            SourcePrior::GeneralizedGaussian { shape } => shape * r.powf(shape - 2.0),
        }
    }

    /// Absolute floor for a row of magnitudes. Never below the smallest
    /// positive normal so `phi` stays finite.
    pub fn floor_for(&self, magnitudes: &[f64]) -> f64 {
        let mean = if magnitudes.is_empty() {
            0.0
        } else {
            magnitudes.iter().sum::<f64>() / magnitudes.len() as f64
        };
        (self.floor_ratio * mean).max(f64::MIN_POSITIVE)
    }

    /// `phi(max(r, floor))`.
    pub fn weight(&self, r: f64, floor: f64) -> f64 {
        self.weight_unfloored(r.max(floor))
    }
}
