//! Blind source separation of convolutive audio mixtures with
//! frequency-domain independent vector analysis.
//!
//! The optimizer is AuxIVA (iterative projection updates of an auxiliary
//! function), optionally wrapped by one of three fixed-point accelerators:
//! a multisecant quasi-Newton step, a fixed over-relaxation step, or
//! SQUAREM. Around it sit the pieces needed to run seeded convergence
//! experiments: STFT analysis/synthesis, synthetic reverberant scenes and
//! BSS-Eval style SDR/SIR/SAR scoring.

pub mod accel;
pub mod error;
pub mod eval;
mod dsp;
mod linalg;
pub mod scene;
pub mod separation;
pub mod spectral;

pub use error::{Error, Result};
