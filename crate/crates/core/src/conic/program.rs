//! Scalar conic programs for the robust power-loading problem.
//!
//! After channel diagonalization the robust design reduces to choosing
//! per-stream products `m_i = f_i g_i` and equalizer energies `n_i = g_i²`:
//!
//! ```text
//! minimize    Σ z_i + μ + σ² Σ n_i
//! subject to  [z_i, γ_i m_i − 1; γ_i m_i − 1, 1 − s_i] ⪰ 0
//!             [μ, ε m_i; ε m_i, s_i] ⪰ 0,   s_i < 1
//!             Σ m_i² / n_i ≤ P
//! ```
//!
//! Every constraint here is a 2x2 LMI or a quadratic-over-linear bound, so
//! the program is written with rotated quadratic cones
//! `{(u, v, w) : u v ≥ w², u ≥ 0, v ≥ 0}`:
//!
//! * `[z, γm − 1; γm − 1, 1 − s] ⪰ 0`  ⇔  `(z, 1 − s, γm − 1)` in the cone,
//! * `[μ, εm; εm, s] ⪰ 0`  ⇔  `(μ, s, εm)` in the cone,
//! * `Σ m²/n ≤ P`  ⇔  `(n_i, p_i, m_i)` in the cone for auxiliary `p_i`, plus
//!   the linear row `Σ p_i ≤ P`,
//! * the strict `s_i < 1` becomes `s_i ≤ 1 − tol_s`.
//!
//! With `ε = 0` the `μ` cones collapse to `μ ≥ 0, s_i ≥ 0` and are emitted
//! as linear rows; `μ` then sits at zero through its unit cost.
//!
//! The same builder produces the two block-restricted programs used by the
//! alternating baseline, where either `g` (so `n_i` and the power split are
//! fixed by `f`) or `f` is held constant.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Margin that turns `s_i < 1` into `s_i ≤ 1 − TOL_S`.
pub const TOL_S: f64 = 1e-9;
/// Lower bound on `μ` when `ε > 0`.
pub const MU_FLOOR: f64 = 1e-12;
/// Smallest admissible `γ_L / γ_1`.
pub const GAMMA_RATIO_FLOOR: f64 = 1e-12;

/// `Σ coeff·x[var] + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, 1.0)
    }

    pub fn term(index: usize, coeff: f64) -> Self {
        Self {
            terms: vec![(index, coeff)],
            constant: 0.0,
        }
    }

    pub fn plus(mut self, index: usize, coeff: f64) -> Self {
        self.terms.push((index, coeff));
        self
    }

    pub fn offset(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).max()
    }
}

/// `u·v ≥ w²`, `u ≥ 0`, `v ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedCone {
    pub u: AffineExpr,
    pub v: AffineExpr,
    pub w: AffineExpr,
}

impl RotatedCone {
    pub fn new(u: AffineExpr, v: AffineExpr, w: AffineExpr) -> Self {
        Self { u, v, w }
    }

    /// How far `x` is outside the cone (0 when inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let (u, v, w) = (self.u.eval(x), self.v.eval(x), self.w.eval(x));
        // second-order form: ‖(u − v, 2w)‖ ≤ u + v
        let t = u + v;
        let r = ((u - v).powi(2) + 4.0 * w * w).sqrt();
        (r - t).max(0.0) / std::f64::consts::SQRT_2
    }
}

/// Linear objective plus rotated-cone and `expr ≥ 0` constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProgram {
    pub num_vars: usize,
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    /// Constant added to the objective (terms fixed by a block restriction).
    pub objective_offset: f64,
    pub cones: Vec<RotatedCone>,
    /// Each expression is constrained to be nonnegative.
    pub linear: Vec<AffineExpr>,
}

impl ConeProgram {
    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::InvalidInput("cone program has no variables".into()));
        }
        if self.objective.len() != self.num_vars || self.var_names.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "{} variables but {} objective coefficients and {} names",
                self.num_vars,
                self.objective.len(),
                self.var_names.len()
            )));
        }
        let exprs = self
            .cones
            .iter()
            .flat_map(|c| [&c.u, &c.v, &c.w])
            .chain(self.linear.iter());
        for e in exprs {
            if let Some(i) = e.max_index() {
                if i >= self.num_vars {
                    return Err(Error::InvalidInput(format!(
                        "constraint references variable {i} of {}",
                        self.num_vars
                    )));
                }
            }
            if !e.constant.is_finite() || e.terms.iter().any(|&(_, c)| !c.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Plain-text listing, one item per line, stable across runs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vars {}", self.num_vars);
        for (i, name) in self.var_names.iter().enumerate() {
            let _ = writeln!(out, "var {i} {name}");
        }
        let _ = writeln!(
            out,
            "minimize {}",
            self.format_expr(&AffineExpr {
                terms: self
                    .objective
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0.0)
                    .map(|(i, &c)| (i, c))
                    .collect(),
                constant: self.objective_offset,
            })
        );
        for c in &self.cones {
            let _ = writeln!(
                out,
                "rcone ({}) * ({}) >= ({})^2",
                self.format_expr(&c.u),
                self.format_expr(&c.v),
                self.format_expr(&c.w)
            );
        }
        for l in &self.linear {
            let _ = writeln!(out, "linear {} >= 0", self.format_expr(l));
        }
        out
    }

    fn format_expr(&self, e: &AffineExpr) -> String {
        let mut s = String::new();
        for &(i, c) in &e.terms {
            let _ = write!(s, "{c:+} {} ", self.var_names[i]);
        }
        let _ = write!(s, "{:+}", e.constant);
        s
    }
}

impl fmt::Display for ConeProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// `[a, b; b, c] ⪰ 0`.
pub fn lmi2x2_check(a: f64, b: f64, c: f64) -> bool {
    a >= 0.0 && c >= 0.0 && a * c >= b * b
}

/// Which per-stream quantities are decision variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Restriction {
    /// Joint program over `m`, `n`.
    None,
    /// Equalizer gains held at the given values; the precoder gains are free.
    FixedG(Vec<f64>),
    /// Precoder gains held at the given values; the equalizer gains are free.
    FixedF(Vec<f64>),
}

/// Where each per-stream quantity lives in the variable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub streams: usize,
    pub restriction: Restriction,
    pub z: usize,
    pub mu: usize,
    /// First index of the free per-stream block (`n`, `f` or `g`).
    pub primary: usize,
    /// First index of the second free block (`m`, or `n` under `FixedF`).
    pub secondary: Option<usize>,
    pub s: usize,
    /// First auxiliary power variable `p_i`, if present.
    pub p: Option<usize>,
}

impl Layout {
    /// Recovers `(f, g)` from a primal vector.
    pub fn scalars(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let l = self.streams;
        match &self.restriction {
            Restriction::None => {
                let n = &x[self.primary..self.primary + l];
                let m0 = self.secondary.expect("joint layout has an m block");
                let m = &x[m0..m0 + l];
                crate::design::recover_scalars(m, n)
            }
            Restriction::FixedG(g) => {
                let f = x[self.primary..self.primary + l].iter().map(|v| v.max(0.0)).collect();
                Ok((f, g.clone()))
            }
            Restriction::FixedF(f) => {
                let g = x[self.primary..self.primary + l].iter().map(|v| v.max(0.0)).collect();
                Ok((f.clone(), g))
            }
        }
    }
}

/// Joint robust program over `(z, μ, n, m, s, p)`.
pub fn build_robust_program(gamma: &[f64], epsilon: f64, noise_var: f64, power: f64) -> Result<ConeProgram> {
    Ok(build_program(gamma, epsilon, noise_var, power, Restriction::None)?.0)
}

/// Builds the joint or a block-restricted program and its variable layout.
pub fn build_program(
    gamma: &[f64],
    epsilon: f64,
    noise_var: f64,
    power: f64,
    restriction: Restriction,
) -> Result<(ConeProgram, Layout)> {
    let l = gamma.len();
    if l == 0 {
        return Err(Error::InvalidInput("need at least one stream".into()));
    }
    if gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidInput("singular values must be finite and positive".into()));
    }
    if gamma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("singular values must be nonincreasing".into()));
    }
    if gamma[l - 1] <= GAMMA_RATIO_FLOOR * gamma[0] {
        return Err(Error::InvalidInput(format!(
            "weakest stream gain {:e} is numerically zero relative to {:e}",
            gamma[l - 1],
            gamma[0]
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if !(noise_var > 0.0 && noise_var.is_finite()) || !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidInput("noise variance and power must be positive".into()));
    }
    match &restriction {
        Restriction::FixedG(v) | Restriction::FixedF(v) => {
            if v.len() != l || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidInput("fixed gains must be L finite nonnegative values".into()));
            }
        }
        Restriction::None => {}
    }

    let mut names = Vec::new();
    let push_block = |prefix: &str, count: usize, names: &mut Vec<String>| {
        let start = names.len();
        for i in 0..count {
            names.push(format!("{prefix}{}", i + 1));
        }
        start
    };
    let z = push_block("z", l, &mut names);
    let mu = names.len();
    names.push("mu".into());

    let (primary, secondary, p) = match &restriction {
        Restriction::None => {
            let n = push_block("n", l, &mut names);
            let m = push_block("m", l, &mut names);
            (n, Some(m), None)
        }
        Restriction::FixedG(_) => (push_block("f", l, &mut names), None, None),
        Restriction::FixedF(_) => {
            let g = push_block("g", l, &mut names);
            let n = push_block("n", l, &mut names);
            (g, Some(n), None)
        }
    };
    let s = push_block("s", l, &mut names);
    let p = match &restriction {
        Restriction::None | Restriction::FixedG(_) => Some(push_block("p", l, &mut names)),
        Restriction::FixedF(_) => p,
    };
    let num_vars = names.len();

    let mut objective = vec![0.0; num_vars];
    let mut objective_offset = 0.0;
    for i in 0..l {
        objective[z + i] = 1.0;
    }
    objective[mu] = 1.0;

    // m_i as an affine expression of the free variables
    let m_expr = |i: usize| -> AffineExpr {
        match &restriction {
            Restriction::None => AffineExpr::var(secondary.unwrap() + i),
            Restriction::FixedG(g) => AffineExpr::term(primary + i, g[i]),
            Restriction::FixedF(f) => AffineExpr::term(primary + i, f[i]),
        }
    };

    let mut cones = Vec::new();
    let mut linear = Vec::new();
    for i in 0..l {
        // z_i (1 − s_i) ≥ (γ_i m_i − 1)²
        let mut w = m_expr(i);
        for t in w.terms.iter_mut() {
            t.1 *= gamma[i];
        }
        cones.push(RotatedCone::new(
            AffineExpr::var(z + i),
            AffineExpr::term(s + i, -1.0).offset(1.0),
            w.offset(-1.0),
        ));
        if epsilon > 0.0 {
            // μ s_i ≥ ε² m_i²
            let mut w = m_expr(i);
            for t in w.terms.iter_mut() {
                t.1 *= epsilon;
            }
            cones.push(RotatedCone::new(AffineExpr::var(mu), AffineExpr::var(s + i), w));
        } else {
            linear.push(AffineExpr::var(s + i));
        }
        linear.push(AffineExpr::term(s + i, -1.0).offset(1.0 - TOL_S));
    }
    if epsilon > 0.0 {
        linear.push(AffineExpr::var(mu).offset(-MU_FLOOR));
    } else {
        linear.push(AffineExpr::var(mu));
    }

    match &restriction {
        Restriction::None => {
            let (n0, m0, p0) = (primary, secondary.unwrap(), p.unwrap());
            for i in 0..l {
                objective[n0 + i] = noise_var;
                cones.push(RotatedCone::new(
                    AffineExpr::var(n0 + i),
                    AffineExpr::var(p0 + i),
                    AffineExpr::var(m0 + i),
                ));
            }
            linear.push(power_row(p0, l, power));
        }
        Restriction::FixedG(g) => {
            let p0 = p.unwrap();
            objective_offset = noise_var * g.iter().map(|v| v * v).sum::<f64>();
            for i in 0..l {
                // p_i ≥ f_i²
                cones.push(RotatedCone::new(
                    AffineExpr::var(p0 + i),
                    AffineExpr::constant(1.0),
                    AffineExpr::var(primary + i),
                ));
            }
            linear.push(power_row(p0, l, power));
        }
        Restriction::FixedF(_) => {
            let n0 = secondary.unwrap();
            for i in 0..l {
                // n_i ≥ g_i²
                objective[n0 + i] = noise_var;
                cones.push(RotatedCone::new(
                    AffineExpr::var(n0 + i),
                    AffineExpr::constant(1.0),
                    AffineExpr::var(primary + i),
                ));
            }
        }
    }

    let program = ConeProgram {
        num_vars,
        var_names: names,
        objective,
        objective_offset,
        cones,
        linear,
    };
    program.validate()?;
    let layout = Layout {
        streams: l,
        restriction,
        z,
        mu,
        primary,
        secondary,
        s,
        p,
    };
    Ok((program, layout))
}

fn power_row(p0: usize, l: usize, power: f64) -> AffineExpr {
    let mut e = AffineExpr::constant(power);
    for i in 0..l {
        e = e.plus(p0 + i, -1.0);
    }
    e
}
