use std::collections::VecDeque;

use num_complex::Complex64;

use super::{inner, norm, AccelConfig, FixedPointMap, FixedPointResidual, Stacked};
use super::{SquaremForm, SquaremStepLength};
use crate::error::Result;
use crate::linalg;

/// Over-relaxed step `W - mu * df`. `mu = -1` reproduces `f(W)`.
pub fn gradient_step(w: &Stacked, residual: &FixedPointResidual, mu: f64) -> Stacked {
    if mu == -1.0 {
        // bit-identical to the plain MM iterate
        return residual.mapped.clone();
    }
    w - &residual.delta_f.mapv(|v| v * mu)
}

/// Recent residuals (single-map mode), exact secant pairs (two-map mode) or
/// iterates with their images (trajectory mode), oldest first.
#[derive(Debug, Clone)]
pub struct SecantHistory {
    q: usize,
    residuals: VecDeque<(usize, Stacked)>,
    pairs: VecDeque<(Stacked, Stacked)>,
    iterates: VecDeque<(Stacked, Stacked)>,
}

impl SecantHistory {
    pub fn new(q: usize) -> Self {
        Self {
            q,
            residuals: VecDeque::with_capacity(q + 1),
            pairs: VecDeque::with_capacity(q),
            iterates: VecDeque::with_capacity(q + 1),
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Records `df` of iteration `iteration`; keeps the newest `q + 1`.
    pub fn push_residual(&mut self, iteration: usize, delta_f: Stacked) {
        if self.residuals.len() == self.q + 1 {
            self.residuals.pop_front();
        }
        self.residuals.push_back((iteration, delta_f));
    }

    /// Records an exact secant pair `(df(W), d2f(W))`; keeps the newest `q`.
    pub fn push_pair(&mut self, u: Stacked, v: Stacked) {
        if self.pairs.len() == self.q {
            self.pairs.pop_front();
        }
        self.pairs.push_back((u, v));
    }

    /// Records an iterate `W` with its image `f(W)`; keeps the newest `q + 1`.
    pub fn push_iterate(&mut self, w: Stacked, mapped: Stacked) {
        if self.iterates.len() == self.q + 1 {
            self.iterates.pop_front();
        }
        self.iterates.push_back((w, mapped));
    }

    pub fn residual_iterations(&self) -> Vec<usize> {
        self.residuals.iter().map(|(i, _)| *i).collect()
    }

    /// Secant columns `(U, V)` with `M U = V`, newest first, or `None`
    /// during warm-up.
    ///
    /// From residuals: `U_j = df(l - j)`, `V_j = df(l - j + 1)` for
    /// `j = 1..q`, using `d2f(W(l-j)) ~ df(W(l-j+1))`.
    ///
    /// From iterates: `U_j = W(l-j+1) - W(l-j)`, `V_j = f(W(l-j+1)) - f(W(l-j))`.
    pub fn secants(&self) -> Option<(Vec<Stacked>, Vec<Stacked>)> {
        if self.pairs.len() == self.q {
            let u = self.pairs.iter().rev().map(|p| p.0.clone()).collect();
            let v = self.pairs.iter().rev().map(|p| p.1.clone()).collect();
            return Some((u, v));
        }
        if self.iterates.len() == self.q + 1 {
            let newest = self.q;
            let (u, v) = (1..=self.q)
                .map(|j| {
                    let (a, b) = (&self.iterates[newest - j + 1], &self.iterates[newest - j]);
                    (&a.0 - &b.0, &a.1 - &b.1)
                })
                .unzip();
            return Some((u, v));
        }
        if self.residuals.len() < self.q + 1 {
            return None;
        }
        let newest = self.residuals.len() - 1;
        let u = (1..=self.q).map(|j| self.residuals[newest - j].1.clone()).collect();
        let v = (1..=self.q).map(|j| self.residuals[newest - j + 1].1.clone()).collect();
        Some((u, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnFallback {
    Warmup,
    Singular,
}

#[derive(Debug, Clone)]
pub struct QnStep {
    pub next: Stacked,
    pub fallback: Option<QnFallback>,
}

/// Multisecant quasi-Newton step on the root problem `df(W) = 0`.
///
/// With `M = V (U^H U)^{-1} U^H` approximating the differential of `f`, the
/// Newton step `W - (M - I)^{-1} df` reduces by the Woodbury identity to
/// `f(W) + V [U^H U - U^H V]^{-1} U^H df`, needing only a `q x q` solve.
/// Falls back to `f(W)` during warm-up or when that system is singular.
pub fn quasi_newton_step(residual: &FixedPointResidual, history: &SecantHistory) -> QnStep {
    let Some((u, v)) = history.secants() else {
        return QnStep {
            next: residual.mapped.clone(),
            fallback: Some(QnFallback::Warmup),
        };
    };
    let q = u.len();
    let mut a = vec![Complex64::default(); q * q];
    let mut b = vec![Complex64::default(); q];
    for i in 0..q {
        for j in 0..q {
            a[i * q + j] = inner(&u[i], &u[j]) - inner(&u[i], &v[j]);
        }
        b[i] = inner(&u[i], &residual.delta_f);
    }
    if linalg::solve_in_place(&mut a, &mut b, q).is_err() || b.iter().any(|c| !c.is_finite()) {
        return QnStep {
            next: residual.mapped.clone(),
            fallback: Some(QnFallback::Singular),
        };
    }
    let mut next = residual.mapped.clone();
    for (coef, col) in b.iter().zip(&v) {
        next.zip_mut_with(col, |n, c| *n += coef * c);
    }
    QnStep { next, fallback: None }
}

#[derive(Debug, Clone)]
pub struct SquaremStep {
    pub next: Stacked,
    /// `f(W)`, the plain MM iterate.
    pub mapped: Stacked,
    /// Step length used, `None` when the fixed-point guard fired.
    pub alpha: Option<f64>,
}

/// One SQUAREM iteration: two chained MM maps give `df` and
/// `dg = d2f - df`; the next iterate is `W - c a df + a^2 dg` with `c = 2`
/// ([`SquaremForm::Derivation`]) or `c = 1` ([`SquaremForm::Algorithm3`]).
///
/// When `||df|| < epsilon_fp * ||W||` the input is returned unchanged after
/// a single evaluation.
pub fn squarem_step(w: &Stacked, map: &mut impl FixedPointMap, config: &AccelConfig) -> Result<SquaremStep> {
    let mapped = map.apply(w)?;
    let df = &mapped - w;
    let df_norm = norm(&df);
    if df_norm < config.epsilon_fp * norm(w) || df_norm == 0.0 {
        return Ok(SquaremStep {
            next: w.clone(),
            mapped,
            alpha: None,
        });
    }
    let mapped2 = map.apply(&mapped)?;
    let d2f = &mapped2 - &mapped;
    let dg = &d2f - &df;
    let dg_norm = norm(&dg);
    let mut alpha = match config.squarem_step {
        SquaremStepLength::ResidualOverCurvature if dg_norm > 0.0 => -df_norm / dg_norm,
        SquaremStepLength::ResidualOverCurvature => -1.0,
        SquaremStepLength::CurvatureOverResidual => -dg_norm / df_norm,
    };
    if config.squarem_clamp {
        alpha = alpha.min(-1.0);
    }
    let c1 = match config.squarem_form {
        SquaremForm::Derivation => 2.0 * alpha,
        SquaremForm::Algorithm3 => alpha,
    };
    let a2 = alpha * alpha;
    let mut next = w.clone();
    ndarray::Zip::from(&mut next)
        .and(&df)
        .and(&dg)
        .for_each(|n, d, g| *n += -c1 * d + a2 * g);
    Ok(SquaremStep {
        next,
        mapped,
        alpha: Some(alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::{residual, CountingMap};
    use ndarray::{array, Array1};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn affine(a: f64, b: f64) -> impl FnMut(&Stacked) -> Result<Stacked> {
        move |w: &Stacked| Ok(w.mapv(|v| v * a + b))
    }

    #[test]
    fn gradient_examples() {
        let w = array![c(1.0), c(-2.0)];
        let mut map = CountingMap::new(affine(0.5, 1.0));
        let r = residual(&w, &mut map).unwrap();
        assert_eq!(gradient_step(&w, &r, -1.0), r.mapped);

        let zero = FixedPointResidual {
            mapped: w.clone(),
            delta_f: Array1::zeros(2),
            delta2_f: None,
        };
        assert_eq!(gradient_step(&w, &zero, -1.8), w);

        let v = array![c(1.5), Complex64::new(0.0, -1.0)];
        let r = FixedPointResidual {
            mapped: v.clone(),
            delta_f: v.clone(),
            delta2_f: None,
        };
        let out = gradient_step(&Array1::zeros(2), &r, -2.0);
        assert_eq!(out, v.mapv(|x| x * 2.0));
    }

    #[test]
    fn qn_warmup_returns_mapped() {
        let w = array![c(3.0)];
        let mut map = CountingMap::new(affine(0.5, 1.0));
        let r = residual(&w, &mut map).unwrap();
        let mut h = SecantHistory::new(1);
        h.push_residual(0, r.delta_f.clone());
        let step = quasi_newton_step(&r, &h);
        assert_eq!(step.next, r.mapped);
        assert_eq!(step.fallback, Some(QnFallback::Warmup));
    }

    #[test]
    fn qn_zero_second_differences_return_mapped() {
        let r = FixedPointResidual {
            mapped: array![c(2.0), c(1.0)],
            delta_f: array![c(0.5), c(0.25)],
            delta2_f: None,
        };
        let mut h = SecantHistory::new(1);
        h.push_pair(array![c(1.0), c(0.0)], Array1::zeros(2));
        let step = quasi_newton_step(&r, &h);
        assert_eq!(step.fallback, None);
        assert_eq!(step.next, r.mapped);
    }

    #[test]
    fn qn_affine_scalar_map_lands_on_fixed_point() {
        let (a, b) = (0.9, 0.3);
        let fixed = b / (1.0 - a);
        let mut map = CountingMap::new(affine(a, b));
        let mut h = SecantHistory::new(1);
        let mut w = array![c(5.0)];
        for l in 0..2 {
            let r = residual(&w, &mut map).unwrap();
            h.push_residual(l, r.delta_f.clone());
            let step = quasi_newton_step(&r, &h);
            if l == 0 {
                assert_eq!(step.fallback, Some(QnFallback::Warmup));
            }
            w = step.next;
        }
        assert!((w[0] - c(fixed)).norm() < 1e-12, "{}", w[0]);
    }

    #[test]
    fn qn_singular_system_falls_back() {
        let r = FixedPointResidual {
            mapped: array![c(2.0)],
            delta_f: array![c(0.5)],
            delta2_f: None,
        };
        let mut h = SecantHistory::new(1);
        // U = V makes U^H U - U^H V vanish
        h.push_pair(array![c(1.0)], array![c(1.0)]);
        let step = quasi_newton_step(&r, &h);
        assert_eq!(step.fallback, Some(QnFallback::Singular));
        assert_eq!(step.next, r.mapped);
    }

    #[test]
    fn history_windows() {
        let mut h = SecantHistory::new(2);
        for i in 0..5 {
            h.push_residual(i, array![c(i as f64)]);
        }
        assert_eq!(h.residual_iterations(), vec![2, 3, 4]);
        let (u, v) = h.secants().unwrap();
        assert_eq!(u.iter().map(|x| x[0].re).collect::<Vec<_>>(), vec![3.0, 2.0]);
        assert_eq!(v.iter().map(|x| x[0].re).collect::<Vec<_>>(), vec![4.0, 3.0]);
    }

    #[test]
    fn trajectory_secants_solve_affine_vector_map() {
        let a = [[0.5, 0.2], [-0.1, 0.7]];
        let b = [1.0, -2.0];
        let f = move |w: &Stacked| {
            Ok(array![
                c(a[0][0] * w[0].re + a[0][1] * w[1].re + b[0]),
                c(a[1][0] * w[0].re + a[1][1] * w[1].re + b[1])
            ])
        };
        // (I - A) w* = b
        let det = (1.0 - a[0][0]) * (1.0 - a[1][1]) - a[0][1] * a[1][0];
        let fixed = [
            ((1.0 - a[1][1]) * b[0] + a[0][1] * b[1]) / det,
            (a[1][0] * b[0] + (1.0 - a[0][0]) * b[1]) / det,
        ];
        let mut map = CountingMap::new(f);
        let mut h = SecantHistory::new(2);
        // arbitrary, non-MM iterates are fine: the secants are exact
        for w in [array![c(4.0), c(1.0)], array![c(-3.0), c(2.5)]] {
            let r = residual(&w, &mut map).unwrap();
            h.push_iterate(w, r.mapped);
        }
        let w = array![c(0.5), c(-6.0)];
        let r = residual(&w, &mut map).unwrap();
        h.push_iterate(w, r.mapped.clone());
        let step = quasi_newton_step(&r, &h);
        assert_eq!(step.fallback, None);
        for (got, want) in step.next.iter().zip(fixed) {
            assert!((got - c(want)).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn squarem_guard_consumes_one_evaluation() {
        let cfg = AccelConfig::squarem();
        let mut map = CountingMap::new(affine(0.5, 1.0));
        let w = array![c(2.0)];
        let step = squarem_step(&w, &mut map, &cfg).unwrap();
        assert_eq!(step.next, w);
        assert_eq!(step.alpha, None);
        assert_eq!(map.evaluations(), 1);
    }

    #[test]
    fn squarem_counts_two_evaluations() {
        let cfg = AccelConfig::squarem();
        let mut map = CountingMap::new(affine(0.5, 1.0));
        squarem_step(&array![c(7.0)], &mut map, &cfg).unwrap();
        assert_eq!(map.evaluations(), 2);
    }

    #[test]
    fn squarem_affine_step_lengths() {
        let (a, b) = (0.8, 0.4);
        let fixed = b / (1.0 - a);
        let w0 = 3.0;
        let e = w0 - fixed;
        let df = (a - 1.0) * e;
        let dg = (a - 1.0) * df;

        // default: a = -|df|/|dg| = -1/(1-a) lands exactly on the fixed point
        let mut map = CountingMap::new(affine(a, b));
        let step = squarem_step(&array![c(w0)], &mut map, &AccelConfig::squarem()).unwrap();
        let alpha = step.alpha.unwrap();
        assert!((alpha + 1.0 / (1.0 - a)).abs() < 1e-12);
        assert!(alpha <= -1.0);
        assert!((step.next[0].re - fixed).abs() < 1e-12);

        // step length as -|dg|/|df| = -|a-1|, unclamped, both update forms
        for (form, c1) in [(SquaremForm::Derivation, 2.0), (SquaremForm::Algorithm3, 1.0)] {
            let cfg = AccelConfig {
                squarem_step: SquaremStepLength::CurvatureOverResidual,
                squarem_clamp: false,
                squarem_form: form,
                ..AccelConfig::squarem()
            };
            let mut map = CountingMap::new(affine(a, b));
            let step = squarem_step(&array![c(w0)], &mut map, &cfg).unwrap();
            let alpha = step.alpha.unwrap();
            assert!((alpha + (a - 1.0f64).abs()).abs() < 1e-12);
            let expected = w0 - c1 * alpha * df + alpha * alpha * dg;
            assert!((step.next[0].re - expected).abs() < 1e-12);
            // not an extrapolation: farther from the fixed point than two MM maps
            assert!((expected - fixed).abs() > (a * a * e).abs());
        }
    }

    #[test]
    fn squarem_complex_vector_uses_euclidean_norms() {
        let cfg = AccelConfig {
            squarem_clamp: false,
            ..AccelConfig::squarem()
        };
        let rot = Complex64::from_polar(0.7, 0.4);
        let mut map = CountingMap::new(move |w: &Stacked| Ok(w.mapv(|v| v * rot)));
        let w = array![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)];
        let step = squarem_step(&w, &mut map, &cfg).unwrap();
        let df = w.mapv(|v| v * rot - v);
        let dg = w.mapv(|v| v * rot * rot - v * rot) - &df;
        let alpha = -norm(&df) / norm(&dg);
        assert!((step.alpha.unwrap() - alpha).abs() < 1e-14);
    }
}
