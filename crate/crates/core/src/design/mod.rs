//! Transceiver designs built on the channel-diagonalizing structure
//! `F = V_h [diag(f); 0]`, `G = [diag(g), 0] U_hᴴ`.

mod alternating;
mod nonrobust;
mod polish;
mod robust;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{svd, ComplexMatrix, SvdFactors};
use crate::worstcase::{worst_case_error_general, DesignProblem};

pub use alternating::{
    alternating_design, initial_precoder, AlternatingError, IterationTrace, StepKind, TraceEntry,
    DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
pub use nonrobust::{nominal_mse, nonrobust_design, water_filling};
pub use robust::{robust_design, solve_scalar_program, RobustDesign};

/// Initialization of the alternating baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Equal power on every stream.
    I,
    /// The perfect-CSI water-filling precoder.
    II,
    /// Random direction scaled to full power.
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    RobustOptimal,
    Alternating(Scheme),
    NonRobust,
    /// Output of the unstructured oracle search; not a benchmark method.
    Unstructured,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::RobustOptimal,
        Method::Alternating(Scheme::I),
        Method::Alternating(Scheme::II),
        Method::Alternating(Scheme::III),
        Method::NonRobust,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RobustOptimal => "robust_optimal",
            Method::Alternating(Scheme::I) => "alternating_I",
            Method::Alternating(Scheme::II) => "alternating_II",
            Method::Alternating(Scheme::III) => "alternating_III",
            Method::NonRobust => "nonrobust",
            Method::Unstructured => "unstructured_search",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown method `{s}`")))
    }
}

/// A precoder/equalizer pair with its worst-case MSE.
#[derive(Debug, Clone)]
pub struct Transceiver {
    /// Precoder, `N x L`.
    pub f: ComplexMatrix,
    /// Equalizer, `L x M`.
    pub g: ComplexMatrix,
    pub worst_case_mse: f64,
    pub method: Method,
    /// Interior-point iterations (robust) or alternation rounds (baseline).
    pub iterations: usize,
}

impl Transceiver {
    /// Builds a transceiver and evaluates its exact worst-case MSE.
    pub fn evaluate(
        f: ComplexMatrix,
        g: ComplexMatrix,
        problem: &DesignProblem,
        method: Method,
        iterations: usize,
    ) -> Result<Self> {
        let cert = worst_case_error_general(&f, &g, problem)?;
        Ok(Self {
            f,
            g,
            worst_case_mse: cert.mse_value,
            method,
            iterations,
        })
    }

    pub fn transmit_power(&self) -> f64 {
        self.f.frobenius_norm_sqr()
    }
}

/// Per-stream gains of a channel-diagonalizing design.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDesign {
    pub gamma: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl ScalarDesign {
    /// `(F, G) = (V_L diag(f), diag(g) U_Lᴴ)` for the leading `L` singular pairs.
    pub fn lift(&self, factors: &SvdFactors) -> (ComplexMatrix, ComplexMatrix) {
        let l = self.f.len();
        let v = factors.v.leading_cols(l);
        let u = factors.u.leading_cols(l);
        let f = ComplexMatrix::from_fn(v.rows(), l, |i, j| v[(i, j)] * self.f[j]);
        let g = ComplexMatrix::from_fn(l, u.rows(), |i, j| u[(j, i)].conj() * self.g[i]);
        (f, g)
    }

    pub fn power(&self) -> f64 {
        self.f.iter().map(|v| v * v).sum()
    }
}

/// Singular structure of the nominal channel restricted to `L` streams.
pub(crate) fn channel_modes(problem: &DesignProblem) -> Result<(SvdFactors, Vec<f64>)> {
    problem.validate()?;
    let factors = svd(&problem.h_tilde)?;
    let gamma = factors.sigma[..problem.streams].to_vec();
    Ok((factors, gamma))
}

/// Recovers gains from the substituted variables: `f_i = m_i/√n_i`, `g_i = √n_i`.
///
/// Streams with `n_i = m_i = 0` are pruned to zero gains. A stream that has
/// `n_i = 0` but `m_i ≠ 0` would carry power into a zero equalizer and is
/// rejected. Inputs below `1e-10` of the largest magnitude count as zero so
/// interior-point output can be fed in directly.
pub fn recover_scalars(m: &[f64], n: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if m.len() != n.len() {
        return Err(Error::DimensionMismatch(format!("{} m values vs {} n values", m.len(), n.len())));
    }
    if m.iter().chain(n).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale_n = n.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale_m = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tiny_n = 1e-10 * scale_n;
    let tiny_m = 1e-10 * scale_m;
    let mut f = Vec::with_capacity(m.len());
    let mut g = Vec::with_capacity(m.len());
    for (i, (&mi, &ni)) in m.iter().zip(n).enumerate() {
        if ni < 0.0 && ni < -tiny_n {
            return Err(Error::InvalidInput(format!("n[{i}] = {ni} is negative")));
        }
        if ni <= tiny_n {
            if mi.abs() > tiny_m {
                return Err(Error::DeadEqualizer { stream: i });
            }
            f.push(0.0);
            g.push(0.0);
            continue;
        }
        let root = ni.sqrt();
        f.push(mi.max(0.0) / root);
        g.push(root);
    }
    Ok((f, g))
}

/// Scales `f` down onto the power sphere when it overshoots the budget.
pub(crate) fn clamp_power(f: &mut [f64], power: f64) {
    let used: f64 = f.iter().map(|v| v * v).sum();
    if used > power {
        let k = (power / used).sqrt();
        for v in f.iter_mut() {
            *v *= k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_complex_matrix, seeded_rng};

    #[test]
    fn recover_examples() {
        let (f, g) = recover_scalars(&[1.0], &[4.0]).unwrap();
        assert_eq!((f[0], g[0]), (0.5, 2.0));

        let (f, g) = recover_scalars(&[0.0], &[0.0]).unwrap();
        assert_eq!((f[0], g[0]), (0.0, 0.0));

        assert!(matches!(
            recover_scalars(&[1.0, 1.0], &[1.0, 0.0]),
            Err(Error::DeadEqualizer { stream: 1 })
        ));
    }

    #[test]
    fn recover_round_trip() {
        let f = [0.3, 1.7, 2.2, 0.01];
        let g = [1.1, 0.2, 0.9, 3.0];
        let m: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
        let n: Vec<f64> = g.iter().map(|b| b * b).collect();
        let (f2, g2) = recover_scalars(&m, &n).unwrap();
        for i in 0..4 {
            assert!((f2[i] - f[i]).abs() < 1e-14);
            assert!((g2[i] - g[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn lift_diagonalizes_channel() {
        let mut rng = seeded_rng(3);
        let h = random_complex_matrix(3, 3, &mut rng);
        let factors = svd(&h).unwrap();
        let sd = ScalarDesign {
            gamma: factors.sigma[..2].to_vec(),
            f: vec![0.8, 0.5],
            g: vec![0.4, 0.6],
        };
        let (f, g) = sd.lift(&factors);
        let ghf = g.matmul(&h).unwrap().matmul(&f).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { sd.f[i] * sd.g[i] * sd.gamma[i] } else { 0.0 };
                assert!((ghf[(i, j)].re - want).abs() < 1e-12 && ghf[(i, j)].im.abs() < 1e-12);
            }
        }
        assert!((f.frobenius_norm_sqr() - sd.power()).abs() < 1e-12);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("robust".parse::<Method>().is_err());
    }
}
