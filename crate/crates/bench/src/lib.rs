//! Seeded convergence experiments: run a separation scheme over many
//! synthetic scenes, write per-iteration CSV traces and compare them.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod trace;

pub use compare::{compare, load_and_compare, render, ninety_percent_mark, Trace, TraceSummary};
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, run_repetition, run_repetitions, ExperimentOutput, Manifest, Repetition};
pub use trace::{MeanRow, TraceRow};
