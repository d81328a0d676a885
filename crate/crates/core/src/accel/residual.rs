use std::time::{Duration, Instant};

use super::Stacked;
use crate::error::Result;

/// A fixed-point map on stacked vectors that counts its evaluations.
pub trait FixedPointMap {
    fn apply(&mut self, w: &Stacked) -> Result<Stacked>;

    /// Evaluations performed so far.
    fn evaluations(&self) -> usize;

    /// Wall-clock spent inside `apply` so far.
    fn time_in_map(&self) -> Duration {
        Duration::ZERO
    }
}

/// Wraps a closure, counting calls and the time spent in them.
pub struct CountingMap<F> {
    inner: F,
    evaluations: usize,
    time: Duration,
}

impl<F> CountingMap<F>
where
    F: FnMut(&Stacked) -> Result<Stacked>,
{
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            evaluations: 0,
            time: Duration::ZERO,
        }
    }
}

impl<F> FixedPointMap for CountingMap<F>
where
    F: FnMut(&Stacked) -> Result<Stacked>,
{
    fn apply(&mut self, w: &Stacked) -> Result<Stacked> {
        let start = Instant::now();
        let out = (self.inner)(w);
        self.time += start.elapsed();
        self.evaluations += 1;
        out
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn time_in_map(&self) -> Duration {
        self.time
    }
}

/// `f(W)` together with `df = f(W) - W` and, when computed, `d2f = f(f(W)) - f(W)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResidual {
    pub mapped: Stacked,
    pub delta_f: Stacked,
    pub delta2_f: Option<Stacked>,
}

/// Evaluates the map once and forms the first residual.
pub fn residual(w: &Stacked, map: &mut impl FixedPointMap) -> Result<FixedPointResidual> {
    let mapped = map.apply(w)?;
    let delta_f = &mapped - w;
    Ok(FixedPointResidual {
        mapped,
        delta_f,
        delta2_f: None,
    })
}
