//! Small dense complex linear algebra (row-major `n x n` slices).
//!
//! The separation core solves thousands of tiny systems per iteration
//! (one `K x K` system per bin and output, `q x q` for the secant step),
//! so these routines work in place on caller-owned buffers.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

/// Solves `a x = b` by Gaussian elimination with partial pivoting,
/// overwriting `b` with `x` and `a` with its LU factors.
///
/// A pivot whose magnitude falls below `n * eps * max|a_ij|` is treated as
/// singular.
pub fn solve_in_place(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> Result<(), Singular> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = n as f64 * f64::EPSILON * scale;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Singular);
    }
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if piv_abs <= tol {
            return Err(Singular);
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let inv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == Complex64::default() {
                continue;
            }
            a[r * n + col] = factor;
            for j in col + 1..n {
                let upper = a[col * n + j];
                a[r * n + j] -= factor * upper;
            }
            let bc = b[col];
            b[r] -= factor * bc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in col + 1..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// `log |det a|`, or `None` when an exact zero pivot is met.
pub fn log_abs_det(a: &[Complex64], n: usize) -> Option<f64> {
    let mut m = a.to_vec();
    let mut acc = 0.0;
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if piv_abs == 0.0 || !piv_abs.is_finite() {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
        }
        acc += piv_abs.ln();
        let inv = m[col * n + col].inv();
        for r in col + 1..n {
            let factor = m[r * n + col] * inv;
            for j in col + 1..n {
                let upper = m[col * n + j];
                m[r * n + j] -= factor * upper;
            }
        }
    }
    Some(acc)
}

/// `y = a x` for row-major `a`.
pub fn mat_vec(a: &[Complex64], x: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|r| a[r * n..(r + 1) * n].iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

/// `c = a b` for row-major square matrices.
pub fn mat_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::default(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Hermitian form `x^H a x` (real part; the imaginary part vanishes for
/// Hermitian `a`).
pub fn hermitian_form(a: &[Complex64], x: &[Complex64], n: usize) -> f64 {
    let ax = mat_vec(a, x, n);
    x.iter().zip(&ax).map(|(u, v)| u.conj() * v).sum::<Complex64>().re
}
