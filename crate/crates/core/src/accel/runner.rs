use std::time::{Duration, Instant};

use super::steps::QnFallback;
use super::{
    gradient_step, quasi_newton_step, residual, squarem_step, AccelConfig, CountingMap,
    FixedPointMap, Safeguard, Scheme, SecantHistory, SecantSource, Stacked,
};
use crate::error::{Error, Result};
use crate::separation::{cost, mm_map, ContrastModel, DemixingSystem};
use crate::spectral::Spectrogram;

/// Something unusual that happened during one accelerated step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// Quasi-Newton history not yet full; took the MM step.
    Warmup,
    /// Quasi-Newton secant system singular; took the MM step.
    SingularSecants,
    /// SQUAREM fixed-point guard fired; iterate unchanged.
    Converged,
    /// Cost guard rejected the accelerated step.
    CostGuardRejected,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: Stacked,
    /// `f(W)` of the step's input.
    pub mapped: Stacked,
    pub event: Option<StepEvent>,
}

/// Per-scheme state carried across iterations.
#[derive(Debug, Clone)]
pub struct Accelerator {
    config: AccelConfig,
    history: SecantHistory,
    iteration: usize,
}

impl Accelerator {
    pub fn new(config: AccelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            history: SecantHistory::new(config.q),
            config,
            iteration: 0,
        })
    }

    pub fn config(&self) -> &AccelConfig {
        &self.config
    }

    /// Forms the next iterate from `w` using `map`.
    pub fn step(&mut self, w: &Stacked, map: &mut impl FixedPointMap) -> Result<StepOutcome> {
        let iteration = self.iteration;
        self.iteration += 1;
        match self.config.scheme {
            Scheme::PlainMm => {
                let mapped = map.apply(w)?;
                Ok(StepOutcome {
                    next: mapped.clone(),
                    mapped,
                    event: None,
                })
            }
            Scheme::Gradient => {
                let r = residual(w, map)?;
                Ok(StepOutcome {
                    next: gradient_step(w, &r, self.config.mu),
                    mapped: r.mapped,
                    event: None,
                })
            }
            Scheme::QuasiNewton => {
                let mut r = residual(w, map)?;
                match self.config.secants {
                    SecantSource::SingleMap => {
                        self.history.push_residual(iteration, r.delta_f.clone());
                    }
                    SecantSource::Trajectory => {
                        self.history.push_iterate(w.clone(), r.mapped.clone());
                    }
                    SecantSource::TwoMaps => {
                        let mapped2 = map.apply(&r.mapped)?;
                        let d2f = &mapped2 - &r.mapped;
                        self.history.push_pair(r.delta_f.clone(), d2f.clone());
                        r.delta2_f = Some(d2f);
                    }
                }
                let step = quasi_newton_step(&r, &self.history);
                let event = step.fallback.map(|f| match f {
                    QnFallback::Warmup => StepEvent::Warmup,
                    QnFallback::Singular => StepEvent::SingularSecants,
                });
                Ok(StepOutcome {
                    next: step.next,
                    mapped: r.mapped,
                    event,
                })
            }
            Scheme::Squarem => {
                let step = squarem_step(w, map, &self.config)?;
                Ok(StepOutcome {
                    event: step.alpha.is_none().then_some(StepEvent::Converged),
                    next: step.next,
                    mapped: step.mapped,
                })
            }
        }
    }
}

/// Bookkeeping for one completed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Cumulative MM map evaluations.
    pub mm_evaluations: usize,
    /// Cumulative optimizer wall-clock (observer time excluded).
    pub elapsed: Duration,
    /// Cumulative wall-clock spent inside the MM map.
    pub mm_time: Duration,
    pub event: Option<StepEvent>,
}

/// What the observer sees after each iteration.
pub struct IterationInfo<'a> {
    pub record: &'a IterationRecord,
    pub demixing: &'a DemixingSystem,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub demixing: DemixingSystem,
    pub records: Vec<IterationRecord>,
}

/// Runs `iterations` iterations of the configured scheme from the identity
/// initialization.
pub fn run(
    x: &Spectrogram,
    model: &ContrastModel,
    config: &AccelConfig,
    iterations: usize,
    observer: impl FnMut(&IterationInfo<'_>),
) -> Result<RunOutput> {
    let init = DemixingSystem::identity(x.channels(), x.bins());
    run_from(&init, x, model, config, iterations, observer)
}

/// Like [`run`] but starting from `initial`.
pub fn run_from(
    initial: &DemixingSystem,
    x: &Spectrogram,
    model: &ContrastModel,
    config: &AccelConfig,
    iterations: usize,
    mut observer: impl FnMut(&IterationInfo<'_>),
) -> Result<RunOutput> {
    if iterations == 0 {
        return Err(Error::InvalidConfig("need at least one iteration".into()));
    }
    let (channels, bins) = (initial.channels(), initial.bins());
    if channels != x.channels() || bins != x.bins() {
        return Err(Error::DimensionMismatch(
            "initial demixing system does not match the spectrogram".into(),
        ));
    }
    let mut accel = Accelerator::new(*config)?;
    let mut map = CountingMap::new(|v: &Stacked| {
        let w = DemixingSystem::unstack(v, channels, bins)?;
        let mut next = mm_map(&w, x, model)?;
        if config.phase_gauge {
            next.fix_phase();
        }
        Ok(next.stack())
    });

    let mut current = initial.clone();
    let mut stacked = current.stack();
    let mut current_cost = match config.safeguard {
        Safeguard::CostGuard => Some(cost(&current, x, model)?),
        Safeguard::None => None,
    };
    let mut elapsed = Duration::ZERO;
    let mut records = Vec::with_capacity(iterations);

    for iteration in 1..=iterations {
        let start = Instant::now();
        let outcome = accel.step(&stacked, &mut map)?;
        let mut event = outcome.event;
        let mut next = DemixingSystem::unstack(&outcome.next, channels, bins);
        if let Some(prev_cost) = current_cost {
            let candidate_cost = match &next {
                Ok(w) => cost(w, x, model)?,
                Err(_) => f64::INFINITY,
            };
            if candidate_cost > prev_cost {
                let fallback = DemixingSystem::unstack(&outcome.mapped, channels, bins)?;
                current_cost = Some(cost(&fallback, x, model)?);
                next = Ok(fallback);
                event = Some(StepEvent::CostGuardRejected);
            } else {
                current_cost = Some(candidate_cost);
            }
        }
        current = next?;
        stacked = if event == Some(StepEvent::CostGuardRejected) {
            outcome.mapped
        } else {
            outcome.next
        };
        elapsed += start.elapsed();

        let record = IterationRecord {
            iteration,
            mm_evaluations: map.evaluations(),
            elapsed,
            mm_time: map.time_in_map(),
            event,
        };
        observer(&IterationInfo {
            record: &record,
            demixing: &current,
        });
        records.push(record);
    }
    Ok(RunOutput {
        demixing: current,
        records,
    })
}
