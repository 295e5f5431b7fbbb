//! Inner maximization of the robust MSE: the worst channel error inside the
//! Frobenius ball `‖E‖_F ≤ ε` for a fixed transceiver.
//!
//! For fixed `(F, G)` the MSE is a convex quadratic in `E`,
//!
//! ```text
//! ‖G(H̃ + E)F − I‖² + σ²‖G‖² = ‖(Fᵀ ⊗ G) vec(E) + vec(GH̃F − I)‖² + σ²‖G‖²,
//! ```
//!
//! so its maximum sits on the sphere `‖E‖_F = ε` and is characterized by the
//! trust-region conditions
//!
//! ```text
//! ωE − GᴴG E FFᴴ = Gᴴ(GH̃F − I)Fᴴ,   ‖E‖_F = ε,   ω ≥ λ_max((FFᴴ)ᵀ ⊗ GᴴG).
//! ```
//!
//! Diagonalizing the quadratic form turns this into the scalar secular
//! equation `Σ c_j² / (ω − λ_j)² = ε²`, solved by [`secular_solve`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, svd, vec_norm, ComplexMatrix};

/// Secular-equation iteration cap.
pub const SECULAR_MAX_ITERS: usize = 200;
const SECULAR_RTOL: f64 = 1e-12;

/// One robust design instance.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    /// Estimated channel `H̃`, `M x N`.
    pub h_tilde: ComplexMatrix,
    /// Uncertainty radius `ε` on `‖E‖_F`.
    pub epsilon: f64,
    pub noise_var: f64,
    /// Sum transmit power budget `tr(FFᴴ) ≤ P`.
    pub power: f64,
    /// Number of data streams `L`.
    pub streams: usize,
}

impl DesignProblem {
    pub fn new(
        h_tilde: ComplexMatrix,
        epsilon: f64,
        noise_var: f64,
        power: f64,
        streams: usize,
    ) -> Result<Self> {
        let p = Self {
            h_tilde,
            epsilon,
            noise_var,
            power,
            streams,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidInput(format!("noise variance must be > 0, got {}", self.noise_var)));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidInput(format!("power must be > 0, got {}", self.power)));
        }
        if !self.h_tilde.is_finite() {
            return Err(Error::NonFinite);
        }
        let rank = svd(&self.h_tilde)?.numerical_rank();
        if self.streams == 0 || self.streams > rank {
            return Err(Error::InvalidInput(format!(
                "stream count {} must lie in 1..={rank} (numerical rank of the channel)",
                self.streams
            )));
        }
        Ok(())
    }

    /// Receive antennas.
    pub fn m(&self) -> usize {
        self.h_tilde.rows()
    }

    /// Transmit antennas.
    pub fn n(&self) -> usize {
        self.h_tilde.cols()
    }
}

/// Worst-case error and its optimality certificate.
#[derive(Debug, Clone)]
pub struct WorstCaseCertificate {
    pub e_star: ComplexMatrix,
    pub omega: f64,
    pub mse_value: f64,
    /// `‖ωE − GᴴG E FFᴴ − Gᴴ(GH̃F − I)Fᴴ‖_F / max(1, ‖Gᴴ(GH̃F − I)Fᴴ‖_F)`.
    pub kkt_residual: f64,
    pub hard_case: bool,
}

fn check_shapes(f: &ComplexMatrix, g: &ComplexMatrix, problem: &DesignProblem) -> Result<()> {
    let (m, n) = problem.h_tilde.shape();
    let l = f.cols();
    if f.rows() != n || g.rows() != l || g.cols() != m {
        return Err(Error::DimensionMismatch(format!(
            "F is {}x{}, G is {}x{}, channel is {m}x{n}",
            f.rows(),
            f.cols(),
            g.rows(),
            g.cols()
        )));
    }
    Ok(())
}

/// `‖G(H̃+E)F − I‖_F² + σ²‖G‖_F²`.
pub fn mse(f: &ComplexMatrix, g: &ComplexMatrix, e: &ComplexMatrix, problem: &DesignProblem) -> Result<f64> {
    check_shapes(f, g, problem)?;
    if e.shape() != problem.h_tilde.shape() {
        return Err(Error::DimensionMismatch(format!(
            "error matrix is {}x{}, channel is {}x{}",
            e.rows(),
            e.cols(),
            problem.m(),
            problem.n()
        )));
    }
    let h = problem.h_tilde.add(e)?;
    let residual = g.matmul(&h)?.matmul(f)?.sub(&ComplexMatrix::identity(f.cols()))?;
    Ok(residual.frobenius_norm_sqr() + problem.noise_var * g.frobenius_norm_sqr())
}

/// Root of the secular equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRoot {
    pub omega: f64,
    /// `ω − max λ`, kept separately so denominators near the top eigenvalue
    /// do not cancel.
    pub gap: f64,
    pub lambda_max: f64,
    pub hard_case: bool,
    pub iterations: usize,
}

impl SecularRoot {
    /// `ω − λ` without cancellation for `λ` close to the largest eigenvalue.
    pub fn denominator(&self, lambda: f64) -> f64 {
        self.gap + (self.lambda_max - lambda)
    }
}

/// Solves `Σ c_j² / (ω − λ_j)² = ε²` for `ω ≥ max λ`.
///
/// Coefficients are tested against exact zero; callers working with
/// numerically computed coefficients should flush negligible ones first.
/// If the left side stays below `ε²` as `ω → max λ⁺` (only possible when every
/// coefficient on the top eigenvalue vanishes) the hard case is reported
/// with `ω = max λ`.
pub fn secular_solve(lambdas: &[f64], coeffs: &[f64], epsilon: f64) -> Result<SecularRoot> {
    if lambdas.is_empty() || lambdas.len() != coeffs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues vs {} coefficients",
            lambdas.len(),
            coeffs.len()
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("secular radius must be > 0, got {epsilon}")));
    }
    if lambdas.iter().chain(coeffs).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }

    let lmax = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps2 = epsilon * epsilon;
    // work in t = ω − max λ against offsets δ_j = max λ − λ_j ≥ 0
    let offsets: Vec<f64> = lambdas.iter().map(|&l| lmax - l).collect();
    let root = |gap: f64, hard_case: bool, iterations: usize| SecularRoot {
        omega: lmax + gap,
        gap,
        lambda_max: lmax,
        hard_case,
        iterations,
    };
    let top_active = offsets.iter().zip(coeffs).any(|(&d, &c)| d == 0.0 && c != 0.0);

    if !top_active {
        let limit: f64 = offsets
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&d, &c)| (c / d).powi(2))
            .sum();
        if limit <= eps2 {
            return Ok(root(0.0, limit < eps2, 0));
        }
    }

    let norm_c = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut lo = offsets
        .iter()
        .zip(coeffs)
        .filter(|(_, &c)| c != 0.0)
        .map(|(&d, &c)| c.abs() / epsilon - d)
        .fold(0.0, f64::max);
    let mut hi = norm_c / epsilon;

    // S(t) and S'(t)/(-2)
    let eval = |t: f64| -> (f64, f64) {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&d, &c) in offsets.iter().zip(coeffs) {
            if c != 0.0 {
                let r = c / (t + d);
                s += r * r;
                ds += r * r / (t + d);
            }
        }
        (s, ds)
    };

    // Newton on ψ(t) = S^{-1/2} − 1/ε: concave and increasing, so iterates
    // started left of the root climb monotonically.
    let mut t = lo;
    for it in 0..SECULAR_MAX_ITERS {
        let (s, ds) = eval(t);
        if (s - eps2).abs() <= SECULAR_RTOL * eps2 {
            return Ok(root(t, false, it));
        }
        if s > eps2 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
            return Ok(root(t, false, it));
        }
        let psi = 1.0 / s.sqrt() - 1.0 / epsilon;
        let dpsi = ds / (s * s.sqrt());
        let newton = t - psi / dpsi;
        t = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (s, _) = eval(t);
    Err(Error::NoConvergence {
        routine: "secular_solve",
        iterations: SECULAR_MAX_ITERS,
        residual: (s - eps2).abs() / eps2,
    })
}

/// Worst-case diagonal error for the channel-diagonalized link.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWorstCase {
    /// Per-stream real perturbation of the singular values.
    pub x: Vec<f64>,
    pub omega: f64,
    pub hard_case: bool,
}

/// Maximizes `Σ (f_i g_i (γ_i + x_i) − 1)²` over `Σ x_i² ≤ ε²`.
///
/// Per-stream stationarity reads `(ω − f_i²g_i²) x_i = f_i g_i (f_i g_i γ_i − 1)`.
/// In the hard case the leftover norm goes on the first stream attaining
/// `max f_i²g_i²`.
pub fn worst_case_error_diagonal(f: &[f64], g: &[f64], gamma: &[f64], epsilon: f64) -> Result<DiagonalWorstCase> {
    let l = f.len();
    if g.len() != l || gamma.len() != l || l == 0 {
        return Err(Error::DimensionMismatch(format!(
            "f, g, gamma lengths {}, {}, {}",
            l,
            g.len(),
            gamma.len()
        )));
    }
    if f.iter().chain(g).chain(gamma).any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("f, g, gamma must be finite and nonnegative".into()));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }

    let lambdas: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a * b).powi(2)).collect();
    let lmax = lambdas.iter().copied().fold(0.0, f64::max);
    if epsilon == 0.0 {
        return Ok(DiagonalWorstCase {
            x: vec![0.0; l],
            omega: lmax,
            hard_case: false,
        });
    }
    let mut d: Vec<f64> = (0..l)
        .map(|i| {
            let m = f[i] * g[i];
            m * (m * gamma[i] - 1.0)
        })
        .collect();
    // a stream sitting exactly at unit gain leaves a rounding-level coefficient
    let flush = 1e-13 * (d.iter().map(|v| v * v).sum::<f64>().sqrt() + lmax * epsilon + 1.0);
    for v in d.iter_mut() {
        if v.abs() <= flush {
            *v = 0.0;
        }
    }
    let root = secular_solve(&lambdas, &d, epsilon)?;
    let mut x: Vec<f64> = (0..l)
        .map(|i| {
            if d[i] == 0.0 {
                0.0
            } else {
                d[i] / root.denominator(lambdas[i])
            }
        })
        .collect();
    if root.hard_case {
        let used: f64 = x.iter().map(|v| v * v).sum();
        let top = lambdas.iter().position(|&v| v == lmax).unwrap_or(0);
        x[top] = (epsilon * epsilon - used).max(0.0).sqrt();
    }
    Ok(DiagonalWorstCase {
        x,
        omega: root.omega,
        hard_case: root.hard_case,
    })
}

/// Scalarized MSE `Σ (f_i g_i (γ_i + x_i) − 1)² + σ² Σ g_i²`.
pub fn diagonal_mse(f: &[f64], g: &[f64], gamma: &[f64], x: &[f64], noise_var: f64) -> f64 {
    (0..f.len())
        .map(|i| (f[i] * g[i] * (gamma[i] + x[i]) - 1.0).powi(2) + noise_var * g[i] * g[i])
        .sum()
}

/// Largest singular value squared, used for `λ_max` of Kronecker forms.
fn spectral_norm_sqr(a: &ComplexMatrix) -> Result<f64> {
    Ok(svd(a)?.sigma.first().copied().unwrap_or(0.0).powi(2))
}

/// Residual of the matrix stationarity condition, relative to `max(1, ‖D‖_F)`.
pub fn kkt_residual(
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    e: &ComplexMatrix,
    omega: f64,
    problem: &DesignProblem,
) -> Result<f64> {
    check_shapes(f, g, problem)?;
    let gh = g.adjoint();
    let r = g
        .matmul(&problem.h_tilde)?
        .matmul(f)?
        .sub(&ComplexMatrix::identity(f.cols()))?;
    let d = gh.matmul(&r)?.matmul(&f.adjoint())?;
    let ceb = gh.matmul(g)?.matmul(e)?.matmul(&f.matmul(&f.adjoint())?)?;
    let res = e.scale(omega).sub(&ceb)?.sub(&d)?;
    Ok(res.frobenius_norm() / d.frobenius_norm().max(1.0))
}

/// Exact inner maximum over `‖E‖_F ≤ ε` for arbitrary `(F, G)`.
pub fn worst_case_error_general(
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    problem: &DesignProblem,
) -> Result<WorstCaseCertificate> {
    check_shapes(f, g, problem)?;
    let (m, n) = problem.h_tilde.shape();
    let eps = problem.epsilon;

    if eps == 0.0 {
        let e = ComplexMatrix::zeros(m, n);
        let omega = spectral_norm_sqr(f)? * spectral_norm_sqr(g)?;
        return Ok(WorstCaseCertificate {
            mse_value: mse(f, g, &e, problem)?,
            kkt_residual: 0.0,
            e_star: e,
            omega,
            hard_case: false,
        });
    }

    let gh = g.adjoint();
    let ffh = f.matmul(&f.adjoint())?;
    let ghg = gh.matmul(g)?;
    // (FFᴴ)ᵀ ⊗ GᴴG acts on vec(E)
    let q = ffh.transpose().kron(&ghg);
    let r = g
        .matmul(&problem.h_tilde)?
        .matmul(f)?
        .sub(&ComplexMatrix::identity(f.cols()))?;
    let b = gh.matmul(&r)?.matmul(&f.adjoint())?.vec();

    let eig = hermitian_eigen(&q)?;
    let mut lambdas = eig.values.clone();
    let lmax = lambdas[0];
    let snap = 1e-12 * lmax.abs().max(1.0);
    for l in lambdas.iter_mut() {
        if lmax - *l <= snap {
            *l = lmax;
        }
    }
    let c: Vec<Complex64> = (0..q.rows())
        .map(|j| {
            (0..q.rows())
                .map(|i| eig.vectors[(i, j)].conj() * b[i])
                .sum()
        })
        .collect();
    let flush = 1e-13 * (vec_norm(&b) + lmax.abs() * eps + 1.0);
    let abs_c: Vec<f64> = c
        .iter()
        .map(|z| if z.norm() <= flush { 0.0 } else { z.norm() })
        .collect();

    let root = secular_solve(&lambdas, &abs_c, eps)?;
    let mut y: Vec<Complex64> = (0..c.len())
        .map(|j| {
            if abs_c[j] == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c[j] / root.denominator(lambdas[j])
            }
        })
        .collect();
    if root.hard_case {
        let used: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        y[0] = Complex64::new((eps * eps - used).max(0.0).sqrt(), 0.0);
    }
    let e_vec = eig.vectors.mat_vec(&y);
    let e_star = ComplexMatrix::unvec(m, n, &e_vec);

    let mse_value = mse(f, g, &e_star, problem)?;
    let kkt = kkt_residual(f, g, &e_star, root.omega, problem)?;
    Ok(WorstCaseCertificate {
        e_star,
        omega: root.omega,
        mse_value,
        kkt_residual: kkt,
        hard_case: root.hard_case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_complex_matrix, random_on_sphere, seeded_rng};

    fn scalar_problem(h: f64, eps: f64, noise: f64) -> DesignProblem {
        DesignProblem::new(ComplexMatrix::from_real(1, 1, &[h]).unwrap(), eps, noise, 1.0, 1).unwrap()
    }

    fn real(x: f64) -> ComplexMatrix {
        ComplexMatrix::from_real(1, 1, &[x]).unwrap()
    }

    #[test]
    fn mse_examples() {
        let p = DesignProblem::new(ComplexMatrix::identity(2), 0.0, 1.0, 1.0, 2).unwrap();
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(mse(&z, &z, &z, &p).unwrap(), 2.0);

        let p = scalar_problem(1.0, 0.0, 1.0);
        assert_eq!(mse(&real(1.0), &real(1.0), &real(0.0), &p).unwrap(), 1.0);

        // (0.5·2.5 − 1)² + 0.25
        let p = scalar_problem(2.0, 0.5, 1.0);
        let v = mse(&real(1.0), &real(0.5), &real(0.5), &p).unwrap();
        let independent = (0.5f64 * (2.0 + 0.5) - 1.0).powi(2) + 1.0 * 0.5 * 0.5;
        assert!((v - independent).abs() < 1e-15);
        assert!((v - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let p = scalar_problem(1.0, 0.0, 1.0);
        let bad = ComplexMatrix::zeros(2, 1);
        assert!(matches!(mse(&bad, &real(1.0), &real(0.0), &p), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn problem_validation() {
        let h = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(DesignProblem::new(h.clone(), 0.1, 1.0, 1.0, 2).is_err());
        assert!(DesignProblem::new(h.clone(), 0.1, 1.0, 1.0, 1).is_ok());
        assert!(DesignProblem::new(h.clone(), -0.1, 1.0, 1.0, 1).is_err());
        assert!(DesignProblem::new(h.clone(), 0.1, 0.0, 1.0, 1).is_err());
        assert!(DesignProblem::new(h, 0.1, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn secular_examples() {
        let r = secular_solve(&[1.0], &[1.0], 0.5).unwrap();
        assert!((r.omega - 3.0).abs() < 1e-12 && !r.hard_case);

        let r = secular_solve(&[1.0, 1.0], &[2.0, 0.0], 1.0).unwrap();
        assert!((r.omega - 3.0).abs() < 1e-12 && !r.hard_case);

        let r = secular_solve(&[2.0, 1.0], &[0.0, 1.0], 10.0).unwrap();
        assert!(r.hard_case);
        assert_eq!(r.omega, 2.0);

        let r = secular_solve(&[2.0, 1.0], &[0.0, 0.0], 1.0).unwrap();
        assert!(r.hard_case);
        assert_eq!(r.omega, 2.0);
    }

    #[test]
    fn secular_rejects_bad_radius() {
        assert!(secular_solve(&[1.0], &[1.0], 0.0).is_err());
        assert!(secular_solve(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn secular_residual_on_random_data() {
        let mut rng = seeded_rng(2);
        use rand::Rng;
        for _ in 0..500 {
            let k = rng.random_range(1..8);
            let lambdas: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let coeffs: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let eps = rng.random_range(0.01..5.0);
            let r = secular_solve(&lambdas, &coeffs, eps).unwrap();
            let lmax = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(r.omega >= lmax);
            assert!(!r.hard_case);
            let s: f64 = lambdas
                .iter()
                .zip(&coeffs)
                .map(|(l, c)| (c / (r.omega - l)).powi(2))
                .sum();
            assert!((s - eps * eps).abs() < 1e-12 * eps * eps, "{s} vs {}", eps * eps);
        }
    }

    #[test]
    fn diagonal_examples() {
        let w = worst_case_error_diagonal(&[1.0], &[1.0], &[2.0], 0.5).unwrap();
        assert!((w.x[0] - 0.5).abs() < 1e-12);
        assert!((w.omega - 3.0).abs() < 1e-12);

        let w = worst_case_error_diagonal(&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0], 1.0).unwrap();
        assert!((w.x[0] - 1.0).abs() < 1e-12 && w.x[1].abs() < 1e-15);
        assert!((w.omega - 3.0).abs() < 1e-12);
        assert!(!w.hard_case);

        let w = worst_case_error_diagonal(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], 1.0).unwrap();
        assert!(w.hard_case);
        assert_eq!(w.omega, 1.0);
        assert_eq!(w.x, vec![1.0, 0.0]);
        // flat objective: any unit x gives the same MSE
        let sigma2 = 0.7;
        let a = diagonal_mse(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &w.x, sigma2);
        let b = diagonal_mse(&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[0.6, -0.8], sigma2);
        assert!((a - (1.0 + 2.0 * sigma2)).abs() < 1e-14);
        assert!((a - b).abs() < 1e-14);

        let w = worst_case_error_diagonal(&[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(w.x, vec![0.0, 0.0]);
        assert_eq!(w.omega, 4.0);
    }

    #[test]
    fn diagonal_second_example_against_circle_scan() {
        // independent scan over the ε-circle
        let sigma2 = 1.0;
        let w = worst_case_error_diagonal(&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0], 1.0).unwrap();
        let value = diagonal_mse(&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0], &w.x, sigma2);
        let mut best = f64::NEG_INFINITY;
        for k in 0..100_000 {
            let t = k as f64 * std::f64::consts::TAU / 100_000.0;
            let (x1, x2) = (t.cos(), t.sin());
            best = best.max((3.0 + x1 - 1.0).powi(2) + (1.0 + x2 - 1.0).powi(2) + 2.0 * sigma2);
        }
        assert!((value - (9.0 + 2.0 * sigma2)).abs() < 1e-12);
        assert!((best - value).abs() < 1e-8);
    }

    #[test]
    fn general_eps_zero() {
        let mut rng = seeded_rng(1);
        let h = random_complex_matrix(2, 2, &mut rng);
        let p = DesignProblem::new(h, 0.0, 1.0, 1.0, 2).unwrap();
        let f = random_complex_matrix(2, 2, &mut rng);
        let g = random_complex_matrix(2, 2, &mut rng);
        let cert = worst_case_error_general(&f, &g, &p).unwrap();
        assert_eq!(cert.e_star.frobenius_norm(), 0.0);
        assert_eq!(cert.mse_value, mse(&f, &g, &ComplexMatrix::zeros(2, 2), &p).unwrap());
    }

    #[test]
    fn general_matches_diagonal_on_diagonal_inputs() {
        // balanced splits (f_i² ∝ g_i²) keep the cross terms below ω
        let cases: [(&[f64], &[f64], &[f64]); 3] = [
            (&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0]),
            (&[1.2, 0.8], &[0.6, 0.4], &[2.5, 1.5]),
            (&[0.9, 0.5, 0.3], &[0.45, 0.25, 0.15], &[3.0, 2.0, 1.2]),
        ];
        for (f, g, gamma) in cases {
            let l = f.len();
            let h = ComplexMatrix::from_diagonal(l, l, gamma);
            let p = DesignProblem::new(h, 0.4, 0.5, 10.0, l).unwrap();
            let fm = ComplexMatrix::from_diagonal(l, l, f);
            let gm = ComplexMatrix::from_diagonal(l, l, g);
            let cert = worst_case_error_general(&fm, &gm, &p).unwrap();
            let w = worst_case_error_diagonal(f, g, gamma, 0.4).unwrap();
            let dval = diagonal_mse(f, g, gamma, &w.x, 0.5);
            assert!((cert.mse_value - dval).abs() < 1e-9, "{} vs {}", cert.mse_value, dval);
            assert!(cert.kkt_residual < 1e-9);
        }
    }

    #[test]
    fn general_dominates_random_feasible_errors() {
        let mut rng = seeded_rng(77);
        for _ in 0..20 {
            let h = random_complex_matrix(2, 3, &mut rng);
            let p = DesignProblem::new(h, 0.3, 0.8, 4.0, 2).unwrap();
            let f = random_complex_matrix(3, 2, &mut rng);
            let g = random_complex_matrix(2, 2, &mut rng);
            let cert = worst_case_error_general(&f, &g, &p).unwrap();
            assert!((cert.e_star.frobenius_norm() - 0.3).abs() < 1e-9);
            assert!(cert.kkt_residual < 1e-9);
            for _ in 0..500 {
                let e = random_on_sphere(2, 3, 0.3, &mut rng);
                assert!(mse(&f, &g, &e, &p).unwrap() <= cert.mse_value + 1e-9);
            }
        }
    }

    #[test]
    fn general_hard_case_zero_transceiver_terms() {
        // F = I, G = I, H̃ = I: residual term vanishes, objective is ‖E‖² + 2σ²
        let p = DesignProblem::new(ComplexMatrix::identity(2), 0.5, 1.0, 2.0, 2).unwrap();
        let i = ComplexMatrix::identity(2);
        let cert = worst_case_error_general(&i, &i, &p).unwrap();
        assert!(cert.hard_case);
        assert!((cert.mse_value - (0.25 + 2.0)).abs() < 1e-12);
        assert!((cert.e_star.frobenius_norm() - 0.5).abs() < 1e-12);
    }
}
