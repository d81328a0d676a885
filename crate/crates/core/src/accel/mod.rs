//! Fixed-point acceleration of the AuxIVA MM map.
//!
//! All schemes act on the stacked demixing vector and treat one MM map
//! application as a black box `f`. They are interchangeable per iteration
//! with plain AuxIVA and differ only in how the next iterate is formed from
//! `f(W)`, `f(f(W))` and earlier residuals.

mod config;
mod residual;
mod runner;
mod steps;

pub use config::{AccelConfig, Safeguard, Scheme, SecantSource, SquaremForm, SquaremStepLength};
pub use residual::{residual, CountingMap, FixedPointMap, FixedPointResidual};
pub use runner::{run, run_from, Accelerator, IterationInfo, IterationRecord, RunOutput, StepEvent, StepOutcome};
pub use steps::{
    gradient_step, quasi_newton_step, squarem_step, QnFallback, QnStep, SecantHistory, SquaremStep,
};

use ndarray::Array1;
use num_complex::Complex64;

/// Stacked complex parameter vector the accelerators operate on.
pub type Stacked = Array1<Complex64>;

pub(crate) fn norm(v: &Stacked) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate-linear inner product `a^H b`.
pub(crate) fn inner(a: &Stacked, b: &Stacked) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
