//! Newton refinement of the joint robust design in the product variables.
//!
//! The worst case depends on the gains only through `m_i = f_i g_i`, and for
//! fixed `m` the cheapest equalizer split meeting the power budget is
//! `g_i² = m_i Σm / P`. The joint design therefore minimizes the convex
//! `φ(m) = max_{‖x‖≤ε} Σ (m_i(γ_i + x_i) − 1)² + (σ²/P)(Σm)²` over `m ≥ 0`,
//! which is smooth away from the hard case and cheap to polish to full
//! precision once the interior-point solution has fixed the active set.

use crate::error::Result;
use crate::worstcase::worst_case_error_diagonal;

const MAX_NEWTON: usize = 30;

pub(crate) struct ProductProblem<'a> {
    pub gamma: &'a [f64],
    pub epsilon: f64,
    pub noise_var: f64,
    pub power: f64,
}

impl ProductProblem<'_> {
    /// Objective and gradient; the gradient uses the maximizing `x` (Danskin).
    pub fn eval(&self, m: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ones = vec![1.0; m.len()];
        let wc = worst_case_error_diagonal(m, &ones, self.gamma, self.epsilon)?;
        let total: f64 = m.iter().sum();
        let k = self.noise_var / self.power;
        let mut value = k * total * total;
        let mut grad = vec![0.0; m.len()];
        for i in 0..m.len() {
            let gx = self.gamma[i] + wc.x[i];
            let r = m[i] * gx - 1.0;
            value += r * r;
            grad[i] = 2.0 * r * gx + 2.0 * k * total;
        }
        Ok((value, grad))
    }

    /// Gains realizing `m` with the balanced split; uses the full budget.
    pub fn split(&self, m: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let total: f64 = m.iter().sum();
        if total <= 0.0 {
            return (vec![0.0; m.len()], vec![0.0; m.len()]);
        }
        let f = m.iter().map(|v| (v * self.power / total).sqrt()).collect();
        let g = m.iter().map(|v| (v * total / self.power).sqrt()).collect();
        (f, g)
    }

    /// Refines `m0` with safeguarded Newton steps on its support. Returns
    /// `None` when no step improves on the start.
    pub fn polish(&self, m0: &[f64]) -> Option<Vec<f64>> {
        let top = m0.iter().fold(0.0_f64, |a, v| a.max(*v));
        if !(top > 0.0) {
            return None;
        }
        let free: Vec<usize> = (0..m0.len()).filter(|&i| m0[i] > 1e-9 * top).collect();
        let mut m: Vec<f64> = m0.iter().enumerate().map(|(i, v)| if free.contains(&i) { *v } else { 0.0 }).collect();
        let (start_value, _) = self.eval(m0).ok()?;
        let (mut value, mut grad) = self.eval(&m).ok()?;
        let grad_norm = |g: &[f64]| free.iter().map(|&i| g[i].abs()).fold(0.0, f64::max);

        for _ in 0..MAX_NEWTON {
            let gn = grad_norm(&grad);
            if gn <= 1e-14 * (1.0 + value) {
                break;
            }
            let Some(step) = self.newton_step(&m, &free, &grad) else { break };
            let mut alpha = 1.0_f64;
            for (k, &i) in free.iter().enumerate() {
                if step[k] < 0.0 {
                    alpha = alpha.min(0.99 * m[i] / -step[k]);
                }
            }
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = m.clone();
                for (k, &i) in free.iter().enumerate() {
                    trial[i] += alpha * step[k];
                }
                if let Ok((tv, tg)) = self.eval(&trial) {
                    if tv < value || (tv <= value * (1.0 + 1e-14) && grad_norm(&tg) < gn) {
                        m = trial;
                        value = tv;
                        grad = tg;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (value <= start_value * (1.0 + 1e-14)).then_some(m)
    }

    /// Solves `H d = −∇φ` on the free block with a central-difference Hessian.
    fn newton_step(&self, m: &[f64], free: &[usize], grad: &[f64]) -> Option<Vec<f64>> {
        let k = free.len();
        let mut h = vec![0.0; k * k];
        for (c, &j) in free.iter().enumerate() {
            let step = 1e-6 * m[j].max(1e-8);
            let mut up = m.to_vec();
            let mut dn = m.to_vec();
            up[j] += step;
            dn[j] -= step;
            let (_, gu) = self.eval(&up).ok()?;
            let (_, gd) = self.eval(&dn).ok()?;
            for (r, &i) in free.iter().enumerate() {
                h[r * k + c] = (gu[i] - gd[i]) / (2.0 * step);
            }
        }
        for r in 0..k {
            for c in 0..r {
                let avg = 0.5 * (h[r * k + c] + h[c * k + r]);
                h[r * k + c] = avg;
                h[c * k + r] = avg;
            }
        }
        let rhs: Vec<f64> = free.iter().map(|&i| -grad[i]).collect();
        solve_spd(&mut h, k, rhs)
    }
}

/// Cholesky solve, returning `None` if the matrix is not numerically positive definite.
fn solve_spd(a: &mut [f64], n: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i * n + k] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            b[i] -= a[k * n + i] * b[k];
        }
        b[i] /= a[i * n + i];
    }
    Some(b)
}
