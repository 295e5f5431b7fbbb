//! Full complex SVD by one-sided (Hestenes) Jacobi.
//!
//! Columns of `A V` are orthogonalized pairwise with unitary 2x2 rotations
//! until every pair is orthogonal to working precision. The column norms are
//! then the singular values and the normalized columns the left singular
//! vectors; `U` is completed to a full unitary basis by Gram-Schmidt.
//!
//! Conventions: singular values are sorted nonincreasing, and the first
//! non-negligible entry of each right singular vector is real and
//! nonnegative (the matching left vector carries the same phase shift).

use num_complex::Complex64;

use super::eigen::{jacobi_rotation, rotate_cols};
use super::matrix::{dot_conj, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Relative threshold under which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// Left singular vectors, `M x M`.
    pub u: ComplexMatrix,
    /// `min(M, N)` singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `N x N`.
    pub v: ComplexMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s = ComplexMatrix::from_diagonal(self.u.rows(), self.v.rows(), &self.sigma);
        self.u
            .matmul(&s)
            .and_then(|us| us.matmul(&self.v.adjoint()))
            .expect("SVD factors have conforming shapes")
    }

    /// Number of singular values above `RANK_TOL * sigma_1`.
    pub fn numerical_rank(&self) -> usize {
        let top = self.sigma.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > RANK_TOL * top).count()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdFactors> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.rows() >= a.cols() {
        tall_svd(a)
    } else {
        // A^H = U' S V'^H  =>  A = V' S U'^H
        let t = tall_svd(&a.adjoint())?;
        let mut f = SvdFactors {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
        normalize_phases(&mut f);
        Ok(f)
    }
}

fn tall_svd(a: &ComplexMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let tol = f64::EPSILON;
    // columns this small are zero at working precision; rotating them only
    // chases underflow
    let negligible = tol * a.frobenius_norm();
    let settled = |alpha: f64, beta: f64, gamma: Complex64| {
        let (na, nb) = (alpha.sqrt(), beta.sqrt());
        na <= negligible || nb <= negligible || gamma.norm() <= tol * na * nb
    };

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let cp = w.col(p);
                let cq = w.col(q);
                let alpha = dot_conj(&cp, &cp).re;
                let beta = dot_conj(&cq, &cq).re;
                let gamma = dot_conj(&cp, &cq);
                if settled(alpha, beta, gamma) {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, gamma, beta);
                rotate_cols(&mut w, p, q, c, s, phase);
                rotate_cols(&mut v, p, q, c, s, phase);
            }
        }
        converged = !rotated;
    }
    if !converged {
        let mut residual = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let (cp, cq) = (w.col(p), w.col(q));
                let (np, nq) = (vec_norm(&cp), vec_norm(&cq));
                if np > negligible && nq > negligible {
                    residual = residual.max(dot_conj(&cp, &cq).norm() / np / nq);
                }
            }
        }
        if residual > 1e2 * tol {
            return Err(Error::NoConvergence {
                routine: "svd",
                iterations: MAX_SWEEPS,
                residual,
            });
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| vec_norm(&w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let top = sigma.first().copied().unwrap_or(0.0);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for (k, &j) in order.iter().enumerate() {
        if top > 0.0 && sigma[k] > RANK_TOL * top {
            let col: Vec<Complex64> = w.col(j).iter().map(|z| z / sigma[k]).collect();
            basis.push(col);
        } else {
            break;
        }
    }
    complete_basis(&mut basis, m);
    let u = ComplexMatrix::from_fn(m, m, |i, j| basis[j][i]);

    let mut f = SvdFactors { u, sigma, v };
    normalize_phases(&mut f);
    Ok(f)
}

/// Extends orthonormal `basis` to `dim` vectors with twice-applied
/// Gram-Schmidt against the canonical axes.
fn complete_basis(basis: &mut Vec<Vec<Complex64>>, dim: usize) {
    let mut axis = 0;
    while basis.len() < dim && axis < dim {
        let mut cand = vec![Complex64::new(0.0, 0.0); dim];
        cand[axis] = Complex64::new(1.0, 0.0);
        axis += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot_conj(b, &cand);
                for (c, &bi) in cand.iter_mut().zip(b) {
                    *c -= proj * bi;
                }
            }
        }
        let norm = vec_norm(&cand);
        if norm > 1e-8 {
            basis.push(cand.into_iter().map(|z| z / norm).collect());
        }
    }
}

fn first_significant(v: &[Complex64]) -> Option<Complex64> {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter().copied().find(|z| z.norm() > 1e-10 * scale.max(f64::MIN_POSITIVE))
}

fn normalize_phases(f: &mut SvdFactors) {
    let k = f.sigma.len();
    for j in 0..f.v.cols() {
        let col = f.v.col(j);
        let Some(lead) = first_significant(&col) else {
            continue;
        };
        let rot = (lead / lead.norm()).conj();
        f.v.set_col(j, &col.iter().map(|z| z * rot).collect::<Vec<_>>());
        if j < k {
            let ucol: Vec<Complex64> = f.u.col(j).iter().map(|z| z * rot).collect();
            f.u.set_col(j, &ucol);
        }
    }
}
