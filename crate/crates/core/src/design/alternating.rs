use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use super::nonrobust::{mmse_equalizer, water_filling};
use super::robust::solve_scalar_program;
use super::{channel_modes, Method, ScalarDesign, Scheme, Transceiver};
use crate::conic::Restriction;
use crate::error::{Error, Result};
use crate::linalg::random::seeded_rng;
use crate::worstcase::{diagonal_mse, worst_case_error_diagonal, DesignProblem};

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Init,
    Precoder,
    Equalizer,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Init => "init",
            StepKind::Precoder => "f",
            StepKind::Equalizer => "g",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub round: usize,
    /// Scalarized worst-case MSE after the step.
    pub objective: f64,
    pub step: StepKind,
    /// Interior-point iterations of the conic solve; `0` for the initial entry.
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
}

impl IterationTrace {
    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.objective)
    }

    pub fn last_objective(&self) -> Option<f64> {
        self.entries.last().map(|e| e.objective)
    }

    /// Most interior-point iterations used by any step.
    pub fn max_solver_iterations(&self) -> usize {
        self.entries.iter().map(|e| e.solver_iterations).max().unwrap_or(0)
    }

    /// Largest increase between consecutive entries; `0` for a monotone trace.
    pub fn max_increase(&self) -> f64 {
        self.entries
            .windows(2)
            .map(|w| w[1].objective - w[0].objective)
            .fold(0.0, f64::max)
    }
}

/// A failed subproblem, together with the steps completed before it.
#[derive(Debug)]
pub struct AlternatingError {
    pub source: Error,
    pub trace: IterationTrace,
}

impl fmt::Display for AlternatingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} steps", self.source, self.trace.entries.len())
    }
}

impl std::error::Error for AlternatingError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<Error> for AlternatingError {
    fn from(source: Error) -> Self {
        Self {
            source,
            trace: IterationTrace::default(),
        }
    }
}

/// Starting precoder gains. Scheme III draws `|N(0,1)|` per stream and
/// scales to full power; `seed` is ignored by the other schemes.
pub fn initial_precoder(scheme: Scheme, gamma: &[f64], noise_var: f64, power: f64, seed: u64) -> Result<Vec<f64>> {
    let l = gamma.len();
    match scheme {
        Scheme::I => Ok(vec![(power / l as f64).sqrt(); l]),
        Scheme::II => water_filling(gamma, noise_var, power),
        Scheme::III => {
            let mut rng = seeded_rng(seed);
            let mut f: Vec<f64> = (0..l).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(vec![(power / l as f64).sqrt(); l]);
            }
            let k = power.sqrt() / norm;
            f.iter_mut().for_each(|v| *v *= k);
            Ok(f)
        }
    }
}

fn scalar_objective(f: &[f64], g: &[f64], gamma: &[f64], problem: &DesignProblem) -> Result<f64> {
    let wc = worst_case_error_diagonal(f, g, gamma, problem.epsilon)?;
    Ok(diagonal_mse(f, g, gamma, &wc.x, problem.noise_var))
}

/// Block-coordinate baseline: alternately optimizes the precoder gains with
/// the equalizer fixed and vice versa, each step an exact conic solve.
///
/// Stops when a full round improves the objective by less than `tol`
/// relative, or after `max_iters` rounds.
pub fn alternating_design(
    problem: &DesignProblem,
    scheme: Scheme,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> std::result::Result<(Transceiver, IterationTrace), AlternatingError> {
    let (factors, gamma) = channel_modes(problem)?;
    let mut f = initial_precoder(scheme, &gamma, problem.noise_var, problem.power, seed)?;
    let mut g = mmse_equalizer(&gamma, &f, problem.noise_var);
    let mut trace = IterationTrace::default();
    let mut last = scalar_objective(&f, &g, &gamma, problem)?;
    trace.entries.push(TraceEntry {
        round: 0,
        objective: last,
        step: StepKind::Init,
        solver_iterations: 0,
    });

    let mut rounds = 0;
    for round in 1..=max_iters {
        rounds = round;
        for step in [StepKind::Precoder, StepKind::Equalizer] {
            let restriction = match step {
                StepKind::Precoder => Restriction::FixedG(g.clone()),
                _ => Restriction::FixedF(f.clone()),
            };
            let solved = solve_scalar_program(&gamma, problem, restriction)
                .and_then(|(nf, ng, sol)| Ok((scalar_objective(&nf, &ng, &gamma, problem)?, nf, ng, sol.iterations)));
            let (objective, nf, ng, solver_iterations) = match solved {
                Ok(v) => v,
                Err(source) => return Err(AlternatingError { source, trace }),
            };
            let previous = trace.last_objective().unwrap_or(last);
            // a block minimizer cannot do worse than the point it started
            // from; a round-off increase is discarded
            let objective = if objective <= previous {
                f = nf;
                g = ng;
                objective
            } else {
                previous
            };
            trace.entries.push(TraceEntry {
                round,
                objective,
                step,
                solver_iterations,
            });
        }
        let now = trace.last_objective().unwrap_or(last);
        let done = last - now < tol * last.abs().max(f64::MIN_POSITIVE);
        last = now;
        if done {
            break;
        }
    }

    let (fm, gm) = ScalarDesign { gamma, f, g }.lift(&factors);
    let t = Transceiver::evaluate(fm, gm, problem, Method::Alternating(scheme), rounds)
        .map_err(|source| AlternatingError {
            source,
            trace: trace.clone(),
        })?;
    Ok((t, trace))
}
