//! Brute-force verifiers. These are independent of the production solvers
//! and only meant for tests and small instances.

mod search;

pub use search::{nelder_mead, unstructured_design_search, NelderMeadResult};

use crate::error::{Error, Result};
use crate::linalg::random::{derive_seed, random_on_sphere, seeded_rng};
use crate::linalg::ComplexMatrix;
use crate::parallel::{map_indexed, try_map_indexed, Execution};
use crate::worstcase::{diagonal_mse, mse, DesignProblem};

/// Tensor grid: `points[k]` equispaced values on `[lower[k], upper[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let spec = Self { lower, upper, points };
        spec.validate()?;
        Ok(spec)
    }

    /// Same interval and resolution in every dimension.
    pub fn cube(dims: usize, lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(vec![lower; dims], vec![upper; dims], vec![points; dims])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        if d == 0 || self.upper.len() != d || self.points.len() != d {
            return Err(Error::DimensionMismatch("grid bounds and point counts disagree".into()));
        }
        if self.points.iter().any(|&p| p < 2) {
            return Err(Error::InvalidInput("grid needs at least 2 points per dimension".into()));
        }
        if self.lower.iter().chain(&self.upper).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.lower.iter().zip(&self.upper).any(|(a, b)| a > b) {
            return Err(Error::InvalidInput("grid lower bound exceeds upper bound".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn coordinate(&self, dim: usize, index: usize) -> f64 {
        let t = index as f64 / (self.points[dim] - 1) as f64;
        self.lower[dim] + t * (self.upper[dim] - self.lower[dim])
    }

    pub fn spacing(&self, dim: usize) -> f64 {
        (self.upper[dim] - self.lower[dim]) / (self.points[dim] - 1) as f64
    }
}

/// Monte Carlo lower bound on the inner maximization: the largest MSE over
/// `n_samples` errors drawn uniformly on the Frobenius sphere of radius `ε`.
///
/// Each sample has its own generator derived from `(seed, index)`, so the
/// result does not depend on how the work is scheduled.
pub fn sampled_worst_case(
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    problem: &DesignProblem,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    sampled_worst_case_with(Execution::Parallel, f, g, problem, n_samples, seed)
}

pub fn sampled_worst_case_with(
    exec: Execution,
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    problem: &DesignProblem,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let (m, n) = problem.h_tilde.shape();
    if problem.epsilon == 0.0 {
        return mse(f, g, &ComplexMatrix::zeros(m, n), problem);
    }
    let values = try_map_indexed(exec, n_samples, |i| {
        let mut rng = seeded_rng(derive_seed(seed, i as u64));
        let e = random_on_sphere(m, n, problem.epsilon, &mut rng);
        mse(f, g, &e, problem)
    })?;
    Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Exhaustive search of `Σ (f_i g_i (γ_i + x_i) − 1)² + σ² Σ g_i²` over the
/// grid points inside the ball `‖x‖ ≤ ε`. Ties go to the first point in
/// row-major grid order.
pub fn grid_worst_case_diagonal(
    f: &[f64],
    g: &[f64],
    gamma: &[f64],
    epsilon: f64,
    noise_var: f64,
    grid: &GridSpec,
) -> Result<(Vec<f64>, f64)> {
    let l = f.len();
    if l > 3 {
        return Err(Error::InvalidInput(format!("grid search refused for L = {l} > 3")));
    }
    if g.len() != l || gamma.len() != l || grid.dims() != l {
        return Err(Error::DimensionMismatch("f, g, gamma and grid must share a length".into()));
    }
    grid.validate()?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if epsilon == 0.0 {
        let x = vec![0.0; l];
        let v = diagonal_mse(f, g, gamma, &x, noise_var);
        return Ok((x, v));
    }
    let radius2 = epsilon * epsilon * (1.0 + 1e-12);
    let inner: usize = grid.points[1..].iter().product();

    let per_slice = map_indexed(Execution::Parallel, grid.points[0], |i0| {
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut x = vec![0.0; l];
        x[0] = grid.coordinate(0, i0);
        for flat in 0..inner {
            let mut rest = flat;
            for k in (1..l).rev() {
                x[k] = grid.coordinate(k, rest % grid.points[k]);
                rest /= grid.points[k];
            }
            if x.iter().map(|v| v * v).sum::<f64>() > radius2 {
                continue;
            }
            let v = diagonal_mse(f, g, gamma, &x, noise_var);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((x.clone(), v));
            }
        }
        best
    });
    per_slice
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(Vec<f64>, f64)>, cand| match acc {
            Some(a) if a.1 >= cand.1 => Some(a),
            _ => Some(cand),
        })
        .ok_or_else(|| Error::InvalidInput("no grid point lies inside the uncertainty ball".into()))
}
