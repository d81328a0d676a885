use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    PlainMm,
    QuasiNewton,
    Gradient,
    Squarem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Safeguard {
    #[default]
    None,
    /// Reject any accelerated step that increases the cost and take the
    /// plain MM step instead. Costs one cost evaluation per iteration.
    CostGuard,
}

/// First-order coefficient of the squared update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SquaremForm {
    /// `W - 2 a df + a^2 dg`, the expansion of two chained gradient steps.
    #[default]
    Derivation,
    /// `W - a df + a^2 dg`.
    Algorithm3,
}

/// Step length rule for SQUAREM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SquaremStepLength {
    /// `a = -||df|| / ||dg||`; extrapolates (`a <= -1` after clamping).
    #[default]
    ResidualOverCurvature,
    /// `a = -||dg|| / ||df||`.
    CurvatureOverResidual,
}

/// How quasi-Newton secant pairs are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecantSource {
    /// One MM map per iteration; second differences are approximated by the
    /// next iteration's residual.
    #[default]
    SingleMap,
    /// Two MM maps per iteration giving exact `(df, d2f)` pairs.
    TwoMaps,
    /// One MM map per iteration; secants are differences of consecutive
    /// iterates and of their images, exact whatever step produced them.
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelConfig {
    pub scheme: Scheme,
    /// Gradient step size, `mu <= -1`. `-1` is plain MM.
    pub mu: f64,
    /// Number of secant pairs for the quasi-Newton step.
    pub q: usize,
    pub safeguard: Safeguard,
    /// Relative fixed-point tolerance: SQUAREM returns its input unchanged
    /// when `||df|| < epsilon_fp * ||W||`.
    pub epsilon_fp: f64,
    pub squarem_form: SquaremForm,
    pub squarem_step: SquaremStepLength,
    /// Clamp the SQUAREM step length to `a <= -1`, so a step is never
    /// shorter than two plain MM maps.
    pub squarem_clamp: bool,
    pub secants: SecantSource,
    /// Follow every MM map with [`DemixingSystem::fix_phase`]. The map is
    /// neutral along row phases, which otherwise leak into the secants and
    /// extrapolation directions.
    ///
    /// [`DemixingSystem::fix_phase`]: crate::separation::DemixingSystem::fix_phase
    pub phase_gauge: bool,
}

impl Default for AccelConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::PlainMm,
            mu: -1.8,
            q: 2,
            safeguard: Safeguard::None,
            epsilon_fp: 1e-10,
            squarem_form: SquaremForm::Derivation,
            squarem_step: SquaremStepLength::ResidualOverCurvature,
            squarem_clamp: true,
            secants: SecantSource::SingleMap,
            phase_gauge: true,
        }
    }
}

impl AccelConfig {
    pub fn plain() -> Self {
        Self::default()
    }

    pub fn gradient(mu: f64) -> Result<Self> {
        let cfg = Self {
            scheme: Scheme::Gradient,
            mu,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn quasi_newton(q: usize) -> Result<Self> {
        let cfg = Self {
            scheme: Scheme::QuasiNewton,
            q,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn squarem() -> Self {
        Self {
            scheme: Scheme::Squarem,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu <= -1.0) {
            return Err(Error::InvalidConfig(format!(
                "gradient step size must satisfy mu <= -1, got {}",
                self.mu
            )));
        }
        if self.q == 0 {
            return Err(Error::InvalidConfig("quasi-Newton needs q >= 1 secants".into()));
        }
        if !(self.epsilon_fp >= 0.0) {
            return Err(Error::InvalidConfig("epsilon_fp must be >= 0".into()));
        }
        Ok(())
    }

    /// MM map evaluations consumed by one non-converged iteration.
    pub fn evaluations_per_iteration(&self) -> usize {
        match (self.scheme, self.secants) {
            (Scheme::Squarem, _) | (Scheme::QuasiNewton, SecantSource::TwoMaps) => 2,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_size_above_minus_one_is_rejected() {
        assert!(AccelConfig::gradient(-0.5).is_err());
        assert!(AccelConfig::gradient(f64::NAN).is_err());
        assert!(AccelConfig::gradient(-1.0).is_ok());
        assert!(AccelConfig::gradient(-1.8).is_ok());
    }

    #[test]
    fn defaults() {
        let c = AccelConfig::default();
        assert_eq!(c.mu, -1.8);
        assert_eq!(c.q, 2);
        assert_eq!(c.safeguard, Safeguard::None);
        assert_eq!(c.epsilon_fp, 1e-10);
        assert!(AccelConfig::quasi_newton(0).is_err());
        assert_eq!(AccelConfig::squarem().evaluations_per_iteration(), 2);
    }
}
