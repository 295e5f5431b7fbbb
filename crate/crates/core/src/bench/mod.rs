//! Monte Carlo harness: random channels, every method per cell, CSV output.

mod config;

pub use config::{dbw_to_linear, BenchConfig};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::design::{alternating_design, nonrobust_design, robust_design, Method, Transceiver};
use crate::error::{Error, Result};
use crate::linalg::random::{derive_seed, random_complex_matrix, seeded_rng};
use crate::linalg::ComplexMatrix;
use crate::parallel::{map_indexed, Execution};
use crate::worstcase::{mse, DesignProblem};

pub const CSV_HEADER: &str = "trial,seed,L,P_dBW,rho,method,status,worst_case_mse,nominal_mse,wall_time_s,iterations";
pub const SUMMARY_HEADER: &str =
    "L,P_dBW,rho,method,trials,failures,mean_worst_case_mse,mean_nominal_mse,mean_wall_time_s,mean_iterations";

/// I.i.d. CN(0, 1) channel, deterministic in `seed`.
pub fn generate_channel(m: usize, n: usize, seed: u64) -> ComplexMatrix {
    random_complex_matrix(m, n, &mut seeded_rng(seed))
}

/// Channel seed for one trial and stream count.
pub fn channel_seed(base: u64, trial: usize, l: usize) -> u64 {
    derive_seed(derive_seed(base, trial as u64), l as u64)
}

/// `ε` for a channel at normalized uncertainty `ρ`.
pub fn epsilon_for(h: &ComplexMatrix, rho: f64) -> f64 {
    (rho * h.frobenius_norm_sqr()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub l: usize,
    pub p_dbw: f64,
    pub rho: f64,
    pub method: Method,
    /// `ok`, or a failure label from [`Error::label`].
    pub status: String,
    pub worst_case_mse: f64,
    pub nominal_mse: f64,
    pub wall_time_s: f64,
    pub iterations: usize,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.seed,
            self.l,
            self.p_dbw,
            self.rho,
            self.method,
            self.status,
            self.worst_case_mse,
            self.nominal_mse,
            self.wall_time_s,
            self.iterations
        )
    }
}

/// Runs one design method; the seed only matters for alternating scheme III.
pub fn run_method(problem: &DesignProblem, method: Method, cfg: &BenchConfig, seed: u64) -> Result<Transceiver> {
    match method {
        Method::RobustOptimal => robust_design(problem).map(|d| d.transceiver),
        Method::NonRobust => nonrobust_design(problem),
        Method::Alternating(scheme) => alternating_design(problem, scheme, cfg.alt_max_iters, cfg.alt_tol, seed)
            .map(|(t, _)| t)
            .map_err(|e| e.source),
        Method::Unstructured => Err(Error::InvalidInput("unstructured_search is not a benchmark method".into())),
    }
}

fn trial_records(cfg: &BenchConfig, trial: usize) -> Vec<TrialRecord> {
    let mut rows = Vec::with_capacity(cfg.row_count() / cfg.trials);
    for &l in &cfg.dims {
        let seed = channel_seed(cfg.seed, trial, l);
        let h = generate_channel(l, l, seed);
        for &p_dbw in &cfg.power_dbw {
            for &rho in &cfg.rho {
                let epsilon = epsilon_for(&h, rho);
                let problem = DesignProblem::new(h.clone(), epsilon, cfg.noise_var, dbw_to_linear(p_dbw), l);
                for &method in &cfg.methods {
                    let start = Instant::now();
                    let outcome = problem.as_ref().map_err(|e| e.label()).and_then(|p| {
                        let t = run_method(p, method, cfg, derive_seed(seed, 3)).map_err(|e| e.label())?;
                        let zero = ComplexMatrix::zeros(p.m(), p.n());
                        let nominal = mse(&t.f, &t.g, &zero, p).map_err(|e| e.label())?;
                        Ok((t, nominal))
                    });
                    let wall_time_s = start.elapsed().as_secs_f64();
                    let (status, worst_case_mse, nominal_mse, iterations) = match outcome {
                        Ok((t, nominal)) => ("ok".to_string(), t.worst_case_mse, nominal, t.iterations),
                        Err(label) => (label, f64::NAN, f64::NAN, 0),
                    };
                    rows.push(TrialRecord {
                        trial,
                        seed,
                        l,
                        p_dbw,
                        rho,
                        method,
                        status,
                        worst_case_mse,
                        nominal_mse,
                        wall_time_s,
                        iterations,
                    });
                }
            }
        }
    }
    rows
}

/// All rows in `(trial, L, P, ρ, method)` order. Trials run concurrently
/// but each is self-contained, so the result is schedule independent.
pub fn run_experiment(cfg: &BenchConfig) -> Result<Vec<TrialRecord>> {
    run_experiment_with(Execution::Parallel, cfg)
}

pub fn run_experiment_with(exec: Execution, cfg: &BenchConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let per_trial = map_indexed(exec, cfg.trials, |trial| trial_records(cfg, trial));
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn write_records<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

/// Per-cell means over successful trials, cells in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub l: usize,
    pub p_dbw: f64,
    pub rho: f64,
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub mean_worst_case_mse: f64,
    pub mean_nominal_mse: f64,
    pub mean_wall_time_s: f64,
    pub mean_iterations: f64,
}

pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut order = Vec::new();
    let mut cells: BTreeMap<usize, Vec<&TrialRecord>> = BTreeMap::new();
    let key_of = |r: &TrialRecord| (r.l, r.p_dbw.to_bits(), r.rho.to_bits(), r.method);
    for r in records {
        let key = key_of(r);
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        cells.entry(idx).or_default().push(r);
    }
    cells
        .into_values()
        .map(|rows| {
            let ok: Vec<&&TrialRecord> = rows.iter().filter(|r| r.is_ok()).collect();
            let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            CellSummary {
                l: rows[0].l,
                p_dbw: rows[0].p_dbw,
                rho: rows[0].rho,
                method: rows[0].method,
                trials: rows.len(),
                failures: rows.len() - ok.len(),
                mean_worst_case_mse: mean(&|r| r.worst_case_mse),
                mean_nominal_mse: mean(&|r| r.nominal_mse),
                mean_wall_time_s: mean(&|r| r.wall_time_s),
                mean_iterations: mean(&|r| r.iterations as f64),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(cells: &[CellSummary], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.l,
            c.p_dbw,
            c.rho,
            c.method,
            c.trials,
            c.failures,
            c.mean_worst_case_mse,
            c.mean_nominal_mse,
            c.mean_wall_time_s,
            c.mean_iterations
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Paths written by [`run_to_dir`].
#[derive(Debug, Clone)]
pub struct BenchOutputs {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub rows: usize,
    pub failures: usize,
}

/// Runs the experiment and writes `results.csv` and `summary.csv` into `dir`.
pub fn run_to_dir(cfg: &BenchConfig, dir: &Path) -> Result<BenchOutputs> {
    let records = run_experiment(cfg)?;
    std::fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    let summary = dir.join("summary.csv");
    write_records(&records, BufWriter::new(File::create(&results)?))?;
    write_summary(&summarize(&records), BufWriter::new(File::create(&summary)?))?;
    Ok(BenchOutputs {
        results,
        summary,
        rows: records.len(),
        failures: records.iter().filter(|r| !r.is_ok()).count(),
    })
}

/// Drops the wall-time column so runs can be compared byte for byte.
pub fn strip_wall_time(csv: &str) -> String {
    let col = CSV_HEADER.split(',').position(|c| c == "wall_time_s").expect("schema has wall_time_s");
    csv.lines()
        .map(|line| {
            line.split(',')
                .enumerate()
                .filter(|(i, _)| *i != col)
                .map(|(_, v)| v)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
