use num_complex::Complex64;

use crate::design::{robust_design, Method, Transceiver};
use crate::error::{Error, Result};
use crate::linalg::random::{derive_seed, random_complex_matrix, seeded_rng};
use crate::linalg::ComplexMatrix;
use crate::parallel::{map_indexed, Execution};
use crate::worstcase::{worst_case_error_general, DesignProblem};

const EVALS_PER_RUN: usize = 3000;
const MAX_RUNS: usize = 4;

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead with dimension-adapted coefficients (Gao & Han), started from
/// an axis-aligned simplex of edge `step` around `x0`.
pub fn nelder_mead<F>(objective: F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };

    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= ftol * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let xr = blend(&centroid, &simplex[n].0, -alpha);
        let fr = eval(&xr);
        if fr < best {
            let xe = blend(&centroid, &simplex[n].0, -alpha * beta);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = blend(&centroid, &xr, gamma);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = blend(&centroid, &simplex[n].0, gamma);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(worst) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x = blend(&x_best, &item.0, delta);
                    let v = eval(&x);
                    *item = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        evaluations: evals.get(),
    }
}

fn pack(f: &ComplexMatrix, g: &ComplexMatrix) -> Vec<f64> {
    f.as_slice()
        .iter()
        .chain(g.as_slice())
        .flat_map(|z| [z.re, z.im])
        .collect()
}

fn unpack(p: &[f64], problem: &DesignProblem) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n, l) = (problem.m(), problem.n(), problem.streams);
    let z: Vec<Complex64> = p.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    let f = ComplexMatrix::from_fn(n, l, |i, j| z[i * l + j]);
    let g = ComplexMatrix::from_fn(l, m, |i, j| z[n * l + i * m + j]);
    // project onto the power ball
    let used = f.frobenius_norm_sqr();
    let f = if used > problem.power {
        f.scale((problem.power / used).sqrt())
    } else {
        f
    };
    (f, g)
}

fn objective(p: &[f64], problem: &DesignProblem) -> f64 {
    let (f, g) = unpack(p, problem);
    worst_case_error_general(&f, &g, problem)
        .map(|c| c.mse_value)
        .unwrap_or(f64::INFINITY)
}

/// Random full-power precoder with the best scalar multiple of a random equalizer.
fn random_start(problem: &DesignProblem, seed: u64) -> Vec<f64> {
    let (m, n, l) = (problem.m(), problem.n(), problem.streams);
    let mut rng = seeded_rng(seed);
    let f = random_complex_matrix(n, l, &mut rng);
    let f = f.scale((problem.power / f.frobenius_norm_sqr()).sqrt());
    let g = random_complex_matrix(l, m, &mut rng);
    let a = g.matmul(&problem.h_tilde).and_then(|gh| gh.matmul(&f));
    let g = match a {
        Ok(a) => {
            let t = a.trace();
            let denom = a.frobenius_norm_sqr() + problem.noise_var * g.frobenius_norm_sqr();
            g.scale_complex(t.conj() / denom)
        }
        Err(_) => g,
    };
    pack(&f, &g)
}

/// Gradient-free search over every complex entry of `(F, G)` for `M = N = L = 2`,
/// started from the structured robust optimum and `restarts` random points.
pub fn unstructured_design_search(problem: &DesignProblem, restarts: usize, seed: u64) -> Result<Transceiver> {
    problem.validate()?;
    if problem.m() != 2 || problem.n() != 2 || problem.streams != 2 {
        return Err(Error::InvalidInput("unstructured search is limited to M = N = L = 2".into()));
    }
    let structured = robust_design(problem)?.transceiver;
    let mut starts = vec![pack(&structured.f, &structured.g)];
    starts.extend((0..restarts).map(|r| random_start(problem, derive_seed(seed, r as u64))));

    let results = map_indexed(Execution::Parallel, starts.len(), |k| {
        let obj = |p: &[f64]| objective(p, problem);
        let scale = starts[k].iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-3);
        let mut best = NelderMeadResult {
            value: obj(&starts[k]),
            x: starts[k].clone(),
            evaluations: 1,
        };
        let mut step = 0.1 * scale;
        for _ in 0..MAX_RUNS {
            let run = nelder_mead(obj, &best.x, step, EVALS_PER_RUN, 1e-14);
            let improved = run.value < best.value - 1e-12 * (1.0 + best.value.abs());
            if run.value < best.value {
                best = NelderMeadResult {
                    evaluations: best.evaluations + run.evaluations,
                    ..run
                };
            }
            if !improved {
                break;
            }
            step *= 0.3;
        }
        best
    });

    let best = results
        .into_iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, NelderMeadResult)>, (k, r)| match acc {
            Some(a) if a.1.value <= r.value => Some(a),
            _ => Some((k, r)),
        })
        .map(|(_, r)| r)
        .expect("at least the structured start");
    let (f, g) = unpack(&best.x, problem);
    Transceiver::evaluate(f, g, problem, Method::Unstructured, best.evaluations)
}
