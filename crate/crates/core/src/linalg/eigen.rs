//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (nonincreasing) and unitary eigenvectors (columns) of a
/// Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Unitary `[[c, s], [-s e^{-iφ}, c e^{-iφ}]]` that diagonalizes the Hermitian
/// 2x2 block `[[a, b], [conj(b), d]]` with `b = |b| e^{iφ}`.
///
/// Returns `(c, s, phase)` where `phase = e^{-iφ}`.
pub(crate) fn jacobi_rotation(a: f64, b: Complex64, d: f64) -> (f64, f64, Complex64) {
    let abs_b = b.norm();
    let phase = if abs_b > 0.0 {
        (b / abs_b).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let tau = (d - a) / (2.0 * abs_b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase)
}

/// Applies `A <- A U` on columns `p, q` for the rotation from [`jacobi_rotation`].
pub(crate) fn rotate_cols(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for i in 0..m.rows() {
        let xp = m[(i, p)];
        let xq = m[(i, q)];
        m[(i, p)] = xp * c - xq * (s * phase);
        m[(i, q)] = xp * s + xq * (c * phase);
    }
}

/// Applies `A <- U^H A` on rows `p, q`.
fn rotate_rows(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let pc = phase.conj();
    for j in 0..m.cols() {
        let xp = m[(p, j)];
        let xq = m[(q, j)];
        m[(p, j)] = xp * c - xq * (s * pc);
        m[(q, j)] = xp * s + xq * (c * pc);
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// `A = Q Λ Q^H` with eigenvalues sorted nonincreasing.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_eigen needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }

    let n = a.rows();
    // symmetrize away the admissible defect
    let mut work = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(a[(i, i)].re, 0.0)
        } else {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }
    });
    let mut q = ComplexMatrix::identity(n);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&work) <= f64::EPSILON * 1e-2 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let b = work[(p, r)];
                let app = work[(p, p)].re;
                let arr = work[(r, r)].re;
                if b.norm() <= f64::MIN_POSITIVE
                    || b.norm() <= 1e-3 * f64::EPSILON * (app.abs() + arr.abs())
                {
                    work[(p, r)] = Complex64::new(0.0, 0.0);
                    work[(r, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(app, b, arr);
                rotate_cols(&mut work, p, r, c, s, phase);
                rotate_rows(&mut work, p, r, c, s, phase);
                work[(p, r)] = Complex64::new(0.0, 0.0);
                work[(r, p)] = Complex64::new(0.0, 0.0);
                work[(p, p)].im = 0.0;
                work[(r, r)].im = 0.0;
                rotate_cols(&mut q, p, r, c, s, phase);
            }
        }
    }
    if !converged {
        let residual = off_diagonal_norm(&work);
        if residual > 1e-13 * scale {
            return Err(Error::NoConvergence {
                routine: "hermitian_eigen",
                iterations: MAX_SWEEPS,
                residual,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(j, j)].re.total_cmp(&work[(i, i)].re));
    let values = order.iter().map(|&i| work[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}
