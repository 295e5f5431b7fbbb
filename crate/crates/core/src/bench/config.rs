use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::design::{Method, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Monte Carlo experiment description.
///
/// Text form is one `key = value` per line, lists comma-separated, `#`
/// starting a comment:
///
/// ```text
/// dims = 2, 4
/// power_dbw = 20
/// rho = 0.01, 0.03
/// trials = 100
/// seed = 7
/// methods = robust_optimal, alternating_I
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Stream counts; each run uses `M = N = L`.
    pub dims: Vec<usize>,
    pub power_dbw: Vec<f64>,
    /// Normalized uncertainty: `ε² = ρ ‖H̃‖_F²`.
    pub rho: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub noise_var: f64,
    pub alt_max_iters: usize,
    pub alt_tol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![2],
            power_dbw: vec![20.0],
            rho: vec![0.01],
            trials: 100,
            seed: 0,
            methods: Method::ALL.to_vec(),
            noise_var: 1.0,
            alt_max_iters: DEFAULT_MAX_ITERS,
            alt_tol: DEFAULT_TOL,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Parse(format!("bad value `{s}` for `{key}`"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    let mut items = parse_list::<T>(key, value)?;
    if items.len() != 1 {
        return Err(Error::Parse(format!("`{key}` takes exactly one value")));
    }
    Ok(items.remove(0))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if seen.contains(&key.to_string()) {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            seen.push(key.to_string());
            match key {
                "dims" => cfg.dims = parse_list(key, value)?,
                "power_dbw" => cfg.power_dbw = parse_list(key, value)?,
                "rho" => cfg.rho = parse_list(key, value)?,
                "trials" => cfg.trials = parse_one(key, value)?,
                "seed" => cfg.seed = parse_one(key, value)?,
                "methods" => cfg.methods = parse_list(key, value)?,
                "noise_var" => cfg.noise_var = parse_one(key, value)?,
                "alt_max_iters" => cfg.alt_max_iters = parse_one(key, value)?,
                "alt_tol" => cfg.alt_tol = parse_one(key, value)?,
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dims = {}", join(&self.dims));
        let _ = writeln!(out, "power_dbw = {}", join(&self.power_dbw));
        let _ = writeln!(out, "rho = {}", join(&self.rho));
        let _ = writeln!(out, "trials = {}", self.trials);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "methods = {}", join(&self.methods));
        let _ = writeln!(out, "noise_var = {}", self.noise_var);
        let _ = writeln!(out, "alt_max_iters = {}", self.alt_max_iters);
        let _ = writeln!(out, "alt_tol = {}", self.alt_tol);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if self.dims.is_empty() || self.power_dbw.is_empty() || self.rho.is_empty() || self.methods.is_empty() {
            return bad("dims, power_dbw, rho and methods must be non-empty");
        }
        if self.dims.contains(&0) {
            return bad("dims must be positive");
        }
        if self.power_dbw.iter().any(|p| !p.is_finite()) {
            return bad("power_dbw must be finite");
        }
        if self.rho.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad("rho must lie in [0, 1)");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.methods.contains(&Method::Unstructured) {
            return bad("unstructured_search is not a benchmark method");
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return bad("noise_var must be positive");
        }
        if self.alt_max_iters == 0 || !(self.alt_tol > 0.0) {
            return bad("alt_max_iters and alt_tol must be positive");
        }
        Ok(())
    }

    /// Rows produced by a full run.
    pub fn row_count(&self) -> usize {
        self.trials * self.dims.len() * self.power_dbw.len() * self.rho.len() * self.methods.len()
    }
}

/// `P = 10^(dBW/10)`.
pub fn dbw_to_linear(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "# fig 3\ndims = 2, 4\npower_dbw = 0,10 , 20\nrho = 0.01\ntrials = 3\nseed = 9\nmethods = robust_optimal,nonrobust\n";
        let cfg = BenchConfig::parse(text).unwrap();
        assert_eq!(cfg.dims, vec![2, 4]);
        assert_eq!(cfg.power_dbw, vec![0.0, 10.0, 20.0]);
        assert_eq!(cfg.methods, vec![Method::RobustOptimal, Method::NonRobust]);
        assert_eq!(cfg.noise_var, 1.0);
        assert_eq!(cfg.row_count(), 3 * 2 * 3 * 2);
        assert_eq!(BenchConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn defaults() {
        let cfg = BenchConfig::parse("dims = 2\n").unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.methods.len(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "dims = 2\nbogus = 1\n",
            "rho = 1.0\n",
            "trials = 0\n",
            "dims = two\n",
            "dims = 2\ndims = 3\n",
            "methods = robust\n",
            "seed = 1, 2\n",
            "noise_var = -1\n",
            "dims\n",
        ] {
            assert!(BenchConfig::parse(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn dbw_conversion() {
        assert!((dbw_to_linear(20.0) - 100.0).abs() < 1e-12);
        assert!((dbw_to_linear(0.0) - 1.0).abs() < 1e-15);
    }
}
