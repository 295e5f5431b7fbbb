use super::{channel_modes, Method, ScalarDesign, Transceiver};
use crate::error::{Error, Result};
use crate::worstcase::DesignProblem;

/// Total-MSE-optimal power split for a perfectly known channel:
/// `f_i² = max(0, σ/(γ_i √ν) − σ²/γ_i²)` with the water level `ν` chosen
/// so the active streams use the whole budget.
///
/// The active set is always the strongest `k` streams, so prefixes of the
/// gain-sorted streams are tested from the longest down.
pub fn water_filling(gamma: &[f64], noise_var: f64, power: f64) -> Result<Vec<f64>> {
    if gamma.is_empty() || gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidInput("stream gains must be finite and positive".into()));
    }
    if !(noise_var > 0.0) || !(power > 0.0) {
        return Err(Error::InvalidInput("noise variance and power must be positive".into()));
    }
    let sigma = noise_var.sqrt();
    let mut order: Vec<usize> = (0..gamma.len()).collect();
    order.sort_by(|&a, &b| gamma[b].total_cmp(&gamma[a]));

    let mut f = vec![0.0; gamma.len()];
    for k in (1..=order.len()).rev() {
        let active = &order[..k];
        let num = power + active.iter().map(|&i| noise_var / gamma[i].powi(2)).sum::<f64>();
        let den: f64 = active.iter().map(|&i| sigma / gamma[i]).sum();
        // level = 1/√ν
        let level = num / den;
        let weakest = gamma[active[k - 1]];
        if level * weakest > sigma || k == 1 {
            for &i in active {
                f[i] = (sigma * level / gamma[i] - noise_var / gamma[i].powi(2)).max(0.0).sqrt();
            }
            break;
        }
    }
    Ok(f)
}

/// Nominal (error-free) MSE of a diagonal design with MMSE equalization:
/// `Σ σ²/(γ_i² f_i² + σ²)`, which is 1 for an unused stream.
pub fn nominal_mse(gamma: &[f64], f: &[f64], noise_var: f64) -> f64 {
    gamma
        .iter()
        .zip(f)
        .map(|(g, fi)| noise_var / (g * g * fi * fi + noise_var))
        .sum()
}

/// MMSE equalizer gain for a given precoder gain.
pub(crate) fn mmse_equalizer(gamma: &[f64], f: &[f64], noise_var: f64) -> Vec<f64> {
    gamma
        .iter()
        .zip(f)
        .map(|(g, fi)| g * fi / (g * g * fi * fi + noise_var))
        .collect()
}

/// Design that treats the estimate as the true channel.
pub fn nonrobust_design(problem: &DesignProblem) -> Result<Transceiver> {
    let (factors, gamma) = channel_modes(problem)?;
    let f = water_filling(&gamma, problem.noise_var, problem.power)?;
    let g = mmse_equalizer(&gamma, &f, problem.noise_var);
    let (fm, gm) = ScalarDesign { gamma, f, g }.lift(&factors);
    Transceiver::evaluate(fm, gm, problem, Method::NonRobust, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on the water level, independent of the prefix search.
    fn level_search(gamma: &[f64], noise_var: f64, power: f64) -> Vec<f64> {
        let sigma = noise_var.sqrt();
        let alloc = |level: f64| -> Vec<f64> {
            gamma
                .iter()
                .map(|g| (sigma * level / g - noise_var / (g * g)).max(0.0))
                .collect()
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while alloc(hi).iter().sum::<f64>() < power {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if alloc(mid).iter().sum::<f64>() < power {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alloc(0.5 * (lo + hi)).iter().map(|v| v.sqrt()).collect()
    }

    #[test]
    fn two_stream_example() {
        let f = water_filling(&[2.0, 1.0], 1.0, 1.0).unwrap();
        assert!((f[0] * f[0] - 0.5).abs() < 1e-14);
        assert!((f[1] * f[1] - 0.5).abs() < 1e-14);
        assert!((nominal_mse(&[2.0, 1.0], &f, 1.0) - 1.0).abs() < 1e-14);
        let g = mmse_equalizer(&[2.0, 1.0], &f, 1.0);
        assert!((g[0] - 2.0 * 0.5f64.sqrt() / 3.0).abs() < 1e-14);
        assert!((g[1] - 0.5f64.sqrt() / 1.5).abs() < 1e-14);
    }

    #[test]
    fn single_stream_example() {
        let f = water_filling(&[1.0], 1.0, 1.0).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15);
        assert!((mmse_equalizer(&[1.0], &f, 1.0)[0] - 0.5).abs() < 1e-15);
        assert!((nominal_mse(&[1.0], &f, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_level_bisection_with_inactive_streams() {
        let gamma = [3.0, 1.0, 0.1];
        let f = water_filling(&gamma, 1.0, 0.5).unwrap();
        let oracle = level_search(&gamma, 1.0, 0.5);
        assert_eq!(f[2], 0.0);
        for (a, b) in f.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!((f.iter().map(|v| v * v).sum::<f64>() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mse_decreases_with_power() {
        let gamma = [2.3, 1.1, 0.4];
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let p = 10f64.powf(-1.0 + 0.2 * k as f64);
            let f = water_filling(&gamma, 1.0, p).unwrap();
            let v = nominal_mse(&gamma, &f, 1.0);
            assert!(v < last);
            last = v;
        }
        assert!(last < 0.01);
    }
}
