//! AuxIVA: the IVA cost, its weighted covariances and the iterative
//! projection MM map.

use ndarray::{Array1, Array2, Array3, ArrayView2};
use num_complex::Complex64;

use super::{ContrastModel, DemixingSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, Singular};
use crate::spectral::Spectrogram;

/// Relative diagonal loading applied once when `W_f V` is singular.
pub const DEGENERATE_LOADING: f64 = 1e-10;

/// Per-frame broadband magnitudes `r[k][t] = ||y_{k,:,t}||_2`, `[K, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandMagnitudes(pub Array2<f64>);

impl BroadbandMagnitudes {
    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Weighted covariance `V_f^k` for one output, `[bins, K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCovariance {
    matrices: Array3<Complex64>,
}

impl WeightedCovariance {
    pub fn matrices(&self) -> &Array3<Complex64> {
        &self.matrices
    }

    pub fn matrix(&self, bin: usize) -> ArrayView2<'_, Complex64> {
        self.matrices.index_axis(ndarray::Axis(0), bin)
    }
}

/// Diagnostics from one MM map application.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MmStats {
    /// `max |w^H V w - 1|` over every iterative projection update.
    pub max_normalization_error: f64,
    /// Number of (output, bin) updates that needed diagonal loading.
    pub regularized: usize,
}

fn check_dims(w: &DemixingSystem, x: &Spectrogram) -> Result<()> {
    if w.channels() != x.channels() || w.bins() != x.bins() {
        return Err(Error::DimensionMismatch(format!(
            "demixing system is {}x{} over {} bins, spectrogram has {} channels and {} bins",
            w.channels(),
            w.channels(),
            w.bins(),
            x.channels(),
            x.bins()
        )));
    }
    Ok(())
}

pub fn broadband_magnitude(y: &Spectrogram) -> BroadbandMagnitudes {
    let (k_max, bins, frames) = y.data().dim();
    let mut r = Array2::zeros((k_max, frames));
    for k in 0..k_max {
        for f in 0..bins {
            for t in 0..frames {
                r[[k, t]] += y.data()[[k, f, t]].norm_sqr();
            }
        }
    }
    r.mapv_inplace(f64::sqrt);
    BroadbandMagnitudes(r)
}

/// Broadband magnitude of output `k` under the current `W`, without
/// materializing the other outputs.
fn output_magnitude(w: &DemixingSystem, x: &Spectrogram, k: usize) -> Vec<f64> {
    let (channels, bins, frames) = x.data().dim();
    let xd = x.data();
    let wm = w.matrices();
    let mut power = vec![0.0; frames];
    let mut y = vec![Complex64::default(); frames];
    for f in 0..bins {
        y.iter_mut().for_each(|v| *v = Complex64::default());
        for c in 0..channels {
            let coeff = wm[[f, k, c]];
            let row = xd.slice(ndarray::s![c, f, ..]);
            for (yt, xt) in y.iter_mut().zip(row.iter()) {
                *yt += coeff * xt;
            }
        }
        for (p, yt) in power.iter_mut().zip(&y) {
            *p += yt.norm_sqr();
        }
    }
    power.into_iter().map(f64::sqrt).collect()
}

/// `V_f = (1/T) sum_t weights[t] x_{f,t} x_{f,t}^H` into `out` (row-major).
fn bin_covariance(x: &Spectrogram, f: usize, weights: &[f64], out: &mut [Complex64]) {
    let (channels, _, frames) = x.data().dim();
    let xd = x.data();
    out.iter_mut().for_each(|v| *v = Complex64::default());
    for t in 0..frames {
        let wt = weights[t];
        for i in 0..channels {
            let xi = xd[[i, f, t]] * wt;
            for j in i..channels {
                out[i * channels + j] += xi * xd[[j, f, t]].conj();
            }
        }
    }
    let inv_t = 1.0 / frames as f64;
    for i in 0..channels {
        for j in i..channels {
            let v = out[i * channels + j] * inv_t;
            out[i * channels + j] = v;
            out[j * channels + i] = v.conj();
        }
        out[i * channels + i].im = 0.0;
    }
}

fn frame_weights(model: &ContrastModel, r: &[f64]) -> Vec<f64> {
    let floor = model.floor_for(r);
    r.iter().map(|&v| model.weight(v, floor)).collect()
}

/// Weighted covariance of the observations for output `k`, weighted per
/// frame by `phi(r[k][t])`.
pub fn weighted_covariance(
    x: &Spectrogram,
    r: &BroadbandMagnitudes,
    k: usize,
    model: &ContrastModel,
) -> Result<WeightedCovariance> {
    let (channels, bins, frames) = x.data().dim();
    if r.0.ncols() != frames || k >= r.0.nrows() {
        return Err(Error::DimensionMismatch(
            "magnitudes do not match spectrogram frames or output index".into(),
        ));
    }
    let row: Vec<f64> = r.0.row(k).to_vec();
    let weights = frame_weights(model, &row);
    let mut matrices = Array3::zeros((bins, channels, channels));
    let mut buf = vec![Complex64::default(); channels * channels];
    for f in 0..bins {
        bin_covariance(x, f, &weights, &mut buf);
        for (dst, src) in matrices
            .index_axis_mut(ndarray::Axis(0), f)
            .iter_mut()
            .zip(&buf)
        {
            *dst = *src;
        }
    }
    Ok(WeightedCovariance { matrices })
}

/// Iterative projection on slices: `u = (W V)^{-1} e_k`, `w = u / sqrt(u^H V u)`.
fn ip_update_raw(wf: &[Complex64], v: &[Complex64], k: usize, n: usize) -> std::result::Result<Vec<Complex64>, Singular> {
    let mut a = linalg::mat_mul(wf, v, n);
    let mut u = vec![Complex64::default(); n];
    u[k] = Complex64::new(1.0, 0.0);
    linalg::solve_in_place(&mut a, &mut u, n)?;
    let q = linalg::hermitian_form(v, &u, n);
    if !(q > 0.0) || !q.is_finite() {
        return Err(Singular);
    }
    let s = 1.0 / q.sqrt();
    u.iter_mut().for_each(|x| *x *= s);
    Ok(u)
}

/// New demixing vector `w_{k,f}` (a column vector; the stored row is its
/// conjugate) such that `w^H V w = 1`.
pub fn ip_update(
    w_f: ArrayView2<'_, Complex64>,
    v: ArrayView2<'_, Complex64>,
    k: usize,
) -> Result<Array1<Complex64>> {
    let n = w_f.nrows();
    if w_f.ncols() != n || v.dim() != (n, n) || k >= n {
        return Err(Error::DimensionMismatch("ip_update operands must be KxK".into()));
    }
    let wf: Vec<Complex64> = w_f.iter().cloned().collect();
    let vv: Vec<Complex64> = v.iter().cloned().collect();
    ip_update_raw(&wf, &vv, k, n)
        .map(Array1::from)
        .map_err(|_| Error::DegenerateCovariance { bin: None, output: k })
}

/// One AuxIVA iteration with the default output order `0..K`.
pub fn mm_map(w: &DemixingSystem, x: &Spectrogram, model: &ContrastModel) -> Result<DemixingSystem> {
    let order: Vec<usize> = (0..w.channels()).collect();
    mm_map_ordered(w, x, model, &order).map(|(next, _)| next)
}

/// One AuxIVA iteration visiting outputs in `order`. For each output the
/// magnitudes are recomputed from the partially updated system, then every
/// bin's row is replaced by its iterative projection update before moving
/// on to the next output.
pub fn mm_map_ordered(
    w: &DemixingSystem,
    x: &Spectrogram,
    model: &ContrastModel,
    order: &[usize],
) -> Result<(DemixingSystem, MmStats)> {
    check_dims(w, x)?;
    let n = w.channels();
    let bins = w.bins();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidConfig("update order must be a permutation of outputs".into()));
    }

    let mut next = w.clone();
    let mut stats = MmStats::default();
    let mut v = vec![Complex64::default(); n * n];
    let mut wf = vec![Complex64::default(); n * n];

    for &k in order {
        let r = output_magnitude(&next, x, k);
        let weights = frame_weights(model, &r);
        for f in 0..bins {
            bin_covariance(x, f, &weights, &mut v);
            for (dst, src) in wf.iter_mut().zip(next.matrix(f).iter()) {
                *dst = *src;
            }
            let u = match ip_update_raw(&wf, &v, k, n) {
                Ok(u) => u,
                Err(Singular) => {
                    let trace: f64 = (0..n).map(|i| v[i * n + i].re).sum();
                    let load = DEGENERATE_LOADING * trace / n as f64;
                    for i in 0..n {
                        v[i * n + i].re += load;
                    }
                    stats.regularized += 1;
                    ip_update_raw(&wf, &v, k, n).map_err(|_| Error::DegenerateCovariance {
                        bin: Some(f),
                        output: k,
                    })?
                }
            };
            let norm_err = (linalg::hermitian_form(&v, &u, n) - 1.0).abs();
            stats.max_normalization_error = stats.max_normalization_error.max(norm_err);
            let mats = next.matrices_mut();
            for c in 0..n {
                mats[[f, k, c]] = u[c].conj();
            }
        }
    }
    Ok((next, stats))
}

/// IVA cost `J = sum_k mean_t G(r[k][t]) - sum_f log|det W_f|`, the
/// function the IP update with `w^H V w = 1` majorizes and minimizes.
/// Returns `+inf` when any `W_f` is singular.
pub fn cost(w: &DemixingSystem, x: &Spectrogram, model: &ContrastModel) -> Result<f64> {
    check_dims(w, x)?;
    let n = w.channels();
    let mut log_det = 0.0;
    for f in 0..w.bins() {
        let m: Vec<Complex64> = w.matrix(f).iter().cloned().collect();
        match linalg::log_abs_det(&m, n) {
            Some(v) => log_det += v,
            None => return Ok(f64::INFINITY),
        }
    }
    let mut contrast = 0.0;
    for k in 0..n {
        let r = output_magnitude(w, x, k);
        contrast += r.iter().map(|&v| model.contrast(v)).sum::<f64>() / r.len() as f64;
    }
    Ok(contrast - log_det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::demix;
    use crate::spectral::StftConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cplx(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spec(data: Array3<Complex64>) -> Spectrogram {
        let bins = data.dim().1;
        let n = if bins == 1 { 2 } else { (bins - 1) * 2 };
        let data = if bins == 1 {
            // window length 2 gives 2 bins; pad a zero bin for single-bin tests
            let (k, _, t) = data.dim();
            let mut d = Array3::zeros((k, 2, t));
            d.slice_mut(ndarray::s![.., 0..1, ..]).assign(&data);
            d
        } else {
            data
        };
        Spectrogram::new(data, StftConfig::new(n, n / 2, Default::default()).unwrap(), 8000).unwrap()
    }

    fn random_spec(k: usize, bins: usize, frames: usize, seed: u64) -> Spectrogram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spec(Array3::from_shape_fn((k, bins, frames), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn broadband_magnitude_examples() {
        let zero = spec(Array3::zeros((2, 3, 4)));
        assert!(broadband_magnitude(&zero).0.iter().all(|v| *v == 0.0));

        let mut d = Array3::zeros((1, 3, 1));
        d[[0, 0, 0]] = cplx(3.0);
        d[[0, 1, 0]] = Complex64::new(0.0, 4.0);
        assert_eq!(broadband_magnitude(&spec(d)).0[[0, 0]], 5.0);

        let y = random_spec(3, 9, 11, 4);
        let r = broadband_magnitude(&y);
        for k in 0..3 {
            for t in 0..11 {
                let direct: f64 = (0..9).map(|f| y.data()[[k, f, t]].norm_sqr()).sum::<f64>().sqrt();
                assert!((r.0[[k, t]] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_weights_give_sample_covariance() {
        // G(r) = r^2 has phi = 2, so V / 2 is the plain sample covariance
        let model = ContrastModel::new(super::super::SourcePrior::GeneralizedGaussian { shape: 2.0 }, 0.0).unwrap();
        let x = random_spec(2, 5, 40, 7);
        let r = broadband_magnitude(&x);
        let v = weighted_covariance(&x, &r, 0, &model).unwrap();
        for f in 0..5 {
            for i in 0..2 {
                for j in 0..2 {
                    let direct: Complex64 = (0..40)
                        .map(|t| x.data()[[i, f, t]] * x.data()[[j, f, t]].conj())
                        .sum::<Complex64>()
                        / 40.0;
                    assert!((v.matrix(f)[[i, j]] / 2.0 - direct).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn scalar_covariance_hand_value() {
        let mut d = Array3::zeros((1, 1, 2));
        d[[0, 0, 0]] = cplx(1.0);
        d[[0, 0, 1]] = cplx(4.0);
        let x = spec(d);
        let r = broadband_magnitude(&x);
        let v = weighted_covariance(&x, &r, 0, &ContrastModel::laplacian()).unwrap();
        assert!((v.matrix(0)[[0, 0]].re - 2.5).abs() < 1e-12);
    }

    #[test]
    fn laplacian_covariance_is_homogeneous_of_degree_one() {
        let x = random_spec(2, 4, 30, 5);
        let c = 3.7;
        let xc = x.with_data(x.data().mapv(|v| v * c)).unwrap();
        let model = ContrastModel::laplacian();
        let v1 = weighted_covariance(&x, &broadband_magnitude(&x), 1, &model).unwrap();
        let v2 = weighted_covariance(&xc, &broadband_magnitude(&xc), 1, &model).unwrap();
        for (a, b) in v1.matrices().iter().zip(v2.matrices()) {
            assert!((a * c - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn covariance_is_hermitian_psd() {
        let x = random_spec(3, 6, 50, 8);
        let v = weighted_covariance(&x, &broadband_magnitude(&x), 2, &ContrastModel::laplacian()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in 0..6 {
            let m: Vec<Complex64> = v.matrix(f).iter().cloned().collect();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i * 3 + j] - m[j * 3 + i].conj()).norm() <= 1e-12 * m[0].norm());
                }
            }
            for _ in 0..20 {
                let z: Vec<Complex64> = (0..3)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                assert!(linalg::hermitian_form(&m, &z, 3) >= -1e-12);
            }
        }
    }

    #[test]
    fn ip_update_scalar_and_identity() {
        let w = Array2::from_elem((1, 1), cplx(1.0));
        let v = Array2::from_elem((1, 1), cplx(4.0));
        let u = ip_update(w.view(), v.view(), 0).unwrap();
        assert!((u[0] - cplx(0.5)).norm() < 1e-15);

        let eye = Array2::from_shape_fn((2, 2), |(i, j)| cplx(if i == j { 1.0 } else { 0.0 }));
        let u = ip_update(eye.view(), eye.view(), 0).unwrap();
        assert!((u[0] - cplx(1.0)).norm() < 1e-15 && u[1].norm() < 1e-15);
    }

    #[test]
    fn ip_update_random_three_by_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_matrix(3, &mut rng);
        // V = B B^H + I is Hermitian positive definite
        let mut v = vec![Complex64::default(); 9];
        for i in 0..3 {
            for j in 0..3 {
                v[i * 3 + j] = (0..3).map(|l| b[i * 3 + l] * b[j * 3 + l].conj()).sum();
            }
            v[i * 3 + i] += 1.0;
        }
        let w = random_matrix(3, &mut rng);
        let wa = Array2::from_shape_vec((3, 3), w.clone()).unwrap();
        let va = Array2::from_shape_vec((3, 3), v.clone()).unwrap();
        let u = ip_update(wa.view(), va.view(), 1).unwrap();
        let u: Vec<Complex64> = u.to_vec();
        assert!((linalg::hermitian_form(&v, &u, 3) - 1.0).abs() < 1e-10);
        // W V u is proportional to e_1
        let wv = linalg::mat_mul(&w, &v, 3);
        let p = linalg::mat_vec(&wv, &u, 3);
        assert!(p[0].norm() < 1e-10 && p[2].norm() < 1e-10 && p[1].norm() > 1e-3);
        // dense-solve oracle via nalgebra
        let m = nalgebra::DMatrix::from_row_slice(3, 3, &wv);
        let sol = m.lu().solve(&nalgebra::DVector::from_vec(vec![cplx(0.0), cplx(1.0), cplx(0.0)])).unwrap();
        let scale = (linalg::hermitian_form(&v, sol.as_slice(), 3)).sqrt();
        for c in 0..3 {
            assert!((u[c] - sol[c] / scale).norm() < 1e-10);
        }
    }

    #[test]
    fn ip_update_singular_is_degenerate() {
        let w = Array2::from_elem((2, 2), cplx(1.0));
        let v = Array2::from_shape_fn((2, 2), |(i, j)| cplx(if i == j { 1.0 } else { 0.0 }));
        assert!(matches!(
            ip_update(w.view(), v.view(), 0),
            Err(Error::DegenerateCovariance { output: 0, .. })
        ));
    }

    #[test]
    fn scalar_mm_map_chain() {
        let mut d = Array3::zeros((1, 1, 2));
        d[[0, 0, 0]] = cplx(1.0);
        d[[0, 0, 1]] = cplx(4.0);
        let x = spec(d);
        // second bin of the padded spectrogram is zero; give it a unit frame
        let mut data = x.data().clone();
        data[[0, 1, 0]] = cplx(1.0);
        let x = x.with_data(data).unwrap();
        let w = DemixingSystem::identity(1, 2);
        let next = mm_map(&w, &x, &ContrastModel::laplacian()).unwrap();
        // r = sqrt(|x0|^2 + |x1|^2) per frame: (sqrt 2, 4)
        let r = [2f64.sqrt(), 4.0];
        let v0 = (1.0 / r[0] + 16.0 / r[1]) / 2.0;
        assert!((next.matrices()[[0, 0, 0]].re - 1.0 / v0.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_bin_scalar_chain_hand_value() {
        // K = 1, F = 1 (plus an all-zero padding bin that is skipped via loading)
        let mut d = Array3::zeros((1, 1, 2));
        d[[0, 0, 0]] = cplx(1.0);
        d[[0, 0, 1]] = cplx(4.0);
        let x = spec(d);
        let r = broadband_magnitude(&x);
        let v = weighted_covariance(&x, &r, 0, &ContrastModel::laplacian()).unwrap();
        let w = Array2::from_elem((1, 1), cplx(1.0));
        let u = ip_update(w.view(), v.matrix(0), 0).unwrap();
        assert!((u[0].re - 1.0 / 2.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cost_examples() {
        let mut d = Array3::zeros((1, 1, 2));
        d[[0, 0, 0]] = cplx(1.0);
        d[[0, 0, 1]] = cplx(4.0);
        let x = spec(d);
        let model = ContrastModel::laplacian();
        // the padding bin holds zeros, so W = 1 there contributes log 1 = 0
        let w = DemixingSystem::identity(1, 2);
        assert!((cost(&w, &x, &model).unwrap() - 2.5).abs() < 1e-12);

        // J(c) = c E|x| - log c over the data bin, minimized at c = 1 / E|x|,
        // which is also the fixed point of the scalar MM map w = 1 / sqrt(E|x| / w)
        let j = |c: f64| {
            let mut m = Array3::from_elem((2, 1, 1), cplx(1.0));
            m[[0, 0, 0]] = cplx(c);
            cost(&DemixingSystem::new(m).unwrap(), &x, &model).unwrap()
        };
        let c_star = 1.0 / 2.5;
        assert!((j(1.3) - (1.3 * 2.5 - 1.3f64.ln())).abs() < 1e-12);
        for dc in [-1e-3, 1e-3, -0.1, 0.1] {
            assert!(j(c_star) < j(c_star + dc));
        }

        let mut sing = Array3::zeros((2, 1, 1));
        sing[[1, 0, 0]] = cplx(1.0);
        assert_eq!(cost(&DemixingSystem::new(sing).unwrap(), &x, &model).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mm_map_never_increases_cost() {
        let model = ContrastModel::laplacian();
        for seed in 0..50 {
            let x = random_spec(2, 8, 64, 100 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = DemixingSystem::new(Array3::from_shape_fn((8, 2, 2), |_| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }))
            .unwrap();
            let j0 = cost(&w, &x, &model).unwrap();
            let (next, stats) = mm_map_ordered(&w, &x, &model, &[0, 1]).unwrap();
            let j1 = cost(&next, &x, &model).unwrap();
            assert!(j1 <= j0 + 1e-9 * j0.abs(), "seed {seed}: {j0} -> {j1}");
            assert!(stats.max_normalization_error < 1e-10);
        }
    }

    #[test]
    fn converged_system_is_a_fixed_point() {
        let model = ContrastModel::laplacian();
        let x = random_spec(2, 4, 80, 33);
        let mut w = DemixingSystem::identity(2, 4);
        let mut rel = f64::INFINITY;
        for _ in 0..5000 {
            let next = mm_map(&w, &x, &model).unwrap();
            let d = &next.stack() - &w.stack();
            rel = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
                / w.stack().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            w = next;
            if rel < 1e-12 {
                break;
            }
        }
        assert!(rel < 1e-10);
        let again = mm_map(&w, &x, &model).unwrap();
        for (a, b) in again.matrices().iter().zip(w.matrices()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn equivariant_under_unitary_diagonal_rescaling() {
        let model = ContrastModel::laplacian();
        let x = random_spec(2, 5, 40, 44);
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let w = DemixingSystem::new(Array3::from_shape_fn((5, 2, 2), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .unwrap();
        let phases: Vec<Complex64> = (0..10)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let d = |c: usize, f: usize| phases[f * 2 + c];
        let mut xd = x.data().clone();
        for ((c, f, _), v) in xd.indexed_iter_mut() {
            *v *= d(c, f);
        }
        let xd = x.with_data(xd).unwrap();
        let mut wd = w.matrices().clone();
        for ((f, _, c), v) in wd.indexed_iter_mut() {
            *v /= d(c, f);
        }
        let wd = DemixingSystem::new(wd).unwrap();
        let y1 = demix(&mm_map(&w, &x, &model).unwrap(), &x).unwrap();
        let y2 = demix(&mm_map(&wd, &xd, &model).unwrap(), &xd).unwrap();
        for (a, b) in y1.data().iter().zip(y2.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn relabeling_commutes_with_matching_update_order() {
        let model = ContrastModel::laplacian();
        let x = random_spec(3, 4, 60, 50);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let w = DemixingSystem::new(Array3::from_shape_fn((4, 3, 3), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .unwrap();
        let perm = [2, 0, 1];
        let expected = mm_map(&w, &x, &model).unwrap().permute_outputs(&perm);
        // old row j sits at new index inv[j]; visit new rows in that order
        let mut inv = [0; 3];
        for (i, &j) in perm.iter().enumerate() {
            inv[j] = i;
        }
        let (got, _) = mm_map_ordered(&w.permute_outputs(&perm), &x, &model, &inv).unwrap();
        for (a, b) in got.matrices().iter().zip(expected.matrices()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_input_is_degenerate() {
        let x = spec(Array3::zeros((2, 3, 5)));
        let err = mm_map(&DemixingSystem::identity(2, 3), &x, &ContrastModel::laplacian());
        assert!(matches!(err, Err(Error::DegenerateCovariance { bin: Some(0), output: 0 })));
    }
}
