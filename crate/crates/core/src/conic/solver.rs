//! Dense primal-dual interior-point method for linear programs over products
//! of nonnegative orthants and second-order cones.
//!
//! Standard form handled internally:
//!
//! ```text
//! minimize cᵀx  subject to  Gx + s = h,  s ∈ K
//! maximize −hᵀz subject to  Gᵀz + c = 0, z ∈ K
//! ```
//!
//! The iteration runs on the homogeneous self-dual embedding
//! (`Gx + s = hτ`, `Gᵀz + cτ = 0`, `κ = −cᵀx − hᵀz`), so infeasibility and
//! unboundedness show up as certificates with `τ → 0`. Each step is a
//! Mehrotra predictor-corrector pair with Nesterov-Todd scaling; the scaled
//! Newton system is reduced to the normal equations `Gᵀ W⁻² G` and solved by
//! Cholesky with iterative refinement.

use super::program::ConeProgram;

pub const MAX_ITERS: usize = 200;

/// Stopping tolerances for the strict exit.
const FEAS_TOL: f64 = 1e-13;
const GAP_TOL: f64 = 1e-13;
/// Normalized residual of an infeasibility or unboundedness ray.
const CERT_TOL: f64 = 1e-8;
/// Looser acceptance used when progress stalls.
const ACCEPT_TOL: f64 = 1e-9;
const STEP_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIters,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConeSolution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub objective_value: f64,
    /// `sᵀz` at the returned point.
    pub duality_gap: f64,
    /// Largest scaled residual or cone violation (primal and dual).
    pub max_violation: f64,
    pub iterations: usize,
}

impl ConeSolution {
    /// Gap and violation thresholds every optimal exit satisfies.
    pub fn is_healthy(&self) -> bool {
        self.status == SolveStatus::Optimal
            && self.duality_gap < 1e-8 * (1.0 + self.objective_value.abs())
            && self.max_violation < 1e-8
    }
}

/// Cone `K = R₊^l × Q^{q_1} × ... × Q^{q_k}`.
#[derive(Debug, Clone)]
struct ConeDims {
    orthant: usize,
    soc: Vec<usize>,
}

impl ConeDims {
    fn total(&self) -> usize {
        self.orthant + self.soc.iter().sum::<usize>()
    }

    fn degree(&self) -> usize {
        self.orthant + self.soc.len()
    }

    /// `(offset, size)` of every second-order block.
    fn soc_blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut off = self.orthant;
        self.soc.iter().map(move |&q| {
            let start = off;
            off += q;
            (start, q)
        })
    }
}

/// Dense problem data in standard form.
struct Standard {
    n: usize,
    m: usize,
    /// Row-major `m x n`.
    g: Vec<f64>,
    h: Vec<f64>,
    c: Vec<f64>,
    dims: ConeDims,
}

impl Standard {
    fn from_program(p: &ConeProgram) -> Self {
        let n = p.num_vars;
        let orthant = p.linear.len();
        let m = orthant + 3 * p.cones.len();
        let mut g = vec![0.0; m * n];
        let mut h = vec![0.0; m];
        // slack = expr  ⇒  h = constant, G row = −coefficients
        let mut put = |row: usize, terms: &[(usize, f64)], constant: f64, scale: f64| {
            h[row] += scale * constant;
            for &(j, a) in terms {
                g[row * n + j] -= scale * a;
            }
        };
        for (k, e) in p.linear.iter().enumerate() {
            put(k, &e.terms, e.constant, 1.0);
        }
        for (k, cone) in p.cones.iter().enumerate() {
            // (u, v, w) rotated  ⇒  (u + v, u − v, 2w) in the Lorentz cone
            let r = orthant + 3 * k;
            put(r, &cone.u.terms, cone.u.constant, 1.0);
            put(r, &cone.v.terms, cone.v.constant, 1.0);
            put(r + 1, &cone.u.terms, cone.u.constant, 1.0);
            put(r + 1, &cone.v.terms, cone.v.constant, -1.0);
            put(r + 2, &cone.w.terms, cone.w.constant, 2.0);
        }
        Self {
            n,
            m,
            g,
            h,
            c: p.objective.clone(),
            dims: ConeDims {
                orthant,
                soc: vec![3; p.cones.len()],
            },
        }
    }

    fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| dot(&self.g[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    fn gt_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &zi) in z.iter().enumerate() {
            if zi != 0.0 {
                for (o, &a) in out.iter_mut().zip(&self.g[i * self.n..(i + 1) * self.n]) {
                    *o += a * zi;
                }
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Nesterov-Todd scaling `W` with `W z = W⁻¹ s = λ`.
struct Scaling {
    /// Orthant part: `sqrt(s / z)`.
    d: Vec<f64>,
    /// Per second-order block: `(β, w̄)` with `W = β [w̄₀ w̄₁ᵀ; w̄₁ I + w̄₁w̄₁ᵀ/(1+w̄₀)]`.
    soc: Vec<(f64, Vec<f64>)>,
}

fn jdot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] - dot(&a[1..], &b[1..])
}

impl Scaling {
    fn new(s: &[f64], z: &[f64], dims: &ConeDims) -> Self {
        let d = (0..dims.orthant).map(|i| (s[i] / z[i]).sqrt()).collect();
        let soc = dims
            .soc_blocks()
            .map(|(off, q)| {
                let sb = &s[off..off + q];
                let zb = &z[off..off + q];
                let sn = jdot(sb, sb).sqrt();
                let zn = jdot(zb, zb).sqrt();
                let beta = (sn / zn).sqrt();
                let sbar: Vec<f64> = sb.iter().map(|v| v / sn).collect();
                let zbar: Vec<f64> = zb.iter().map(|v| v / zn).collect();
                let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
                let mut w: Vec<f64> = sbar
                    .iter()
                    .zip(&zbar)
                    .enumerate()
                    .map(|(k, (a, b))| if k == 0 { a + b } else { a - b })
                    .collect();
                for v in w.iter_mut() {
                    *v /= 2.0 * gamma;
                }
                (beta, w)
            })
            .collect();
        Self { d, soc }
    }

    /// `W v` (`inverse = false`) or `W⁻¹ v`.
    fn apply(&self, v: &[f64], dims: &ConeDims, inverse: bool) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..dims.orthant {
            out[i] = if inverse { v[i] / self.d[i] } else { v[i] * self.d[i] };
        }
        for ((off, q), (beta, w)) in dims.soc_blocks().zip(&self.soc) {
            let vb = &v[off..off + q];
            let sign = if inverse { -1.0 } else { 1.0 };
            let scale = if inverse { 1.0 / beta } else { *beta };
            let w1dv1 = dot(&w[1..], &vb[1..]);
            out[off] = scale * (w[0] * vb[0] + sign * w1dv1);
            let coef = sign * vb[0] + w1dv1 / (1.0 + w[0]);
            for k in 1..q {
                out[off + k] = scale * (vb[k] + coef * w[k]);
            }
        }
        out
    }
}

/// Jordan product `u ∘ v`.
fn jordan(u: &[f64], v: &[f64], dims: &ConeDims) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for i in 0..dims.orthant {
        out[i] = u[i] * v[i];
    }
    for (off, q) in dims.soc_blocks() {
        let (ub, vb) = (&u[off..off + q], &v[off..off + q]);
        out[off] = dot(ub, vb);
        for k in 1..q {
            out[off + k] = ub[0] * vb[k] + vb[0] * ub[k];
        }
    }
    out
}

/// Solves `λ ∘ x = r` for `x`.
fn jordan_div(lambda: &[f64], r: &[f64], dims: &ConeDims) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for i in 0..dims.orthant {
        out[i] = r[i] / lambda[i];
    }
    for (off, q) in dims.soc_blocks() {
        let (l, rb) = (&lambda[off..off + q], &r[off..off + q]);
        let det = jdot(l, l);
        let x0 = (l[0] * rb[0] - dot(&l[1..], &rb[1..])) / det;
        out[off] = x0;
        for k in 1..q {
            out[off + k] = (rb[k] - x0 * l[k]) / l[0];
        }
    }
    out
}

fn identity_element(dims: &ConeDims) -> Vec<f64> {
    let mut e = vec![0.0; dims.total()];
    for v in e.iter_mut().take(dims.orthant) {
        *v = 1.0;
    }
    for (off, _) in dims.soc_blocks() {
        e[off] = 1.0;
    }
    e
}

/// Largest `α ≥ 0` with `x + α d ∈ K` (infinite if unbounded).
fn max_step(x: &[f64], d: &[f64], dims: &ConeDims) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..dims.orthant {
        if d[i] < 0.0 {
            alpha = alpha.min(-x[i] / d[i]);
        }
    }
    for (off, q) in dims.soc_blocks() {
        let (xb, db) = (&x[off..off + q], &d[off..off + q]);
        let a = jdot(db, db);
        let b = 2.0 * jdot(xb, db);
        let c = jdot(xb, xb).max(0.0);
        let scale = a.abs().max(b.abs()).max(c);
        let root = if a.abs() <= 1e-15 * scale {
            if b < 0.0 {
                -c / b
            } else {
                f64::INFINITY
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                f64::INFINITY
            } else {
                let sq = disc.sqrt();
                let qq = -0.5 * (b + b.signum() * sq);
                let mut best = f64::INFINITY;
                for r in [qq / a, if qq != 0.0 { c / qq } else { f64::INFINITY }] {
                    if r > 0.0 && r < best {
                        best = r;
                    }
                }
                // both roots nonpositive with a > 0: the ray stays inside
                best
            }
        };
        alpha = alpha.min(root);
        // ray through the apex region
        if db[0] < 0.0 {
            alpha = alpha.min(-xb[0] / db[0]);
        }
    }
    alpha
}

/// Cholesky factor (lower, row-major) of a symmetric positive definite matrix.
/// Householder QR of a column-major `m x n` matrix with `m >= n`.
struct HouseholderQr {
    m: usize,
    n: usize,
    /// Reflector vectors, column-major; `v_k` occupies rows `k..m` of column `k`.
    v: Vec<f64>,
    beta: Vec<f64>,
    /// Upper triangle, row-major `n x n`.
    r: Vec<f64>,
}

impl HouseholderQr {
    fn new(mut a: Vec<f64>, m: usize, n: usize) -> Option<Self> {
        if m < n {
            return None;
        }
        let mut beta = vec![0.0; n];
        let mut r = vec![0.0; n * n];
        for k in 0..n {
            let col = &mut a[k * m..(k + 1) * m];
            let alpha = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(alpha > 0.0 && alpha.is_finite()) {
                return None;
            }
            let diag = if col[k] > 0.0 { -alpha } else { alpha };
            col[k] -= diag;
            let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
            beta[k] = 2.0 / vnorm2;
            r[k * n + k] = diag;
            for j in (k + 1)..n {
                let (head, tail) = a.split_at_mut(j * m);
                let vk = &head[k * m + k..(k + 1) * m];
                let cj = &mut tail[k..m];
                let t = beta[k] * vk.iter().zip(cj.iter()).map(|(x, y)| x * y).sum::<f64>();
                for (c, v) in cj.iter_mut().zip(vk) {
                    *c -= t * v;
                }
                r[k * n + j] = tail[k];
            }
        }
        Some(Self { m, n, v: a, beta, r })
    }

    fn reflect(&self, k: usize, y: &mut [f64]) {
        let vk = &self.v[k * self.m + k..(k + 1) * self.m];
        let t = self.beta[k] * vk.iter().zip(&y[k..]).map(|(a, b)| a * b).sum::<f64>();
        for (c, v) in y[k..].iter_mut().zip(vk) {
            *c -= t * v;
        }
    }

    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.n {
            self.reflect(k, y);
        }
    }

    fn apply_q(&self, y: &mut [f64]) {
        for k in (0..self.n).rev() {
            self.reflect(k, y);
        }
    }

    /// `Rᵀ u = b`.
    fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut u = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                u[i] -= self.r[k * n + i] * u[k];
            }
            u[i] /= self.r[i * n + i];
        }
        u
    }

    /// `R x = b`.
    fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.r[i * n + k] * x[k];
            }
            x[i] /= self.r[i * n + i];
        }
        x
    }
}

/// Factored KKT system for one scaling, solved through a QR of `W⁻¹G`
/// so the conditioning is not squared as in the normal equations.
struct KktSolver<'a> {
    data: &'a Standard,
    scaling: &'a Scaling,
    qr: HouseholderQr,
}

impl<'a> KktSolver<'a> {
    fn new(data: &'a Standard, scaling: &'a Scaling) -> Option<Self> {
        let (n, m) = (data.n, data.m);
        let mut wg = vec![0.0; m * n];
        for j in 0..n {
            let col: Vec<f64> = (0..m).map(|i| data.g[i * n + j]).collect();
            let scaled = scaling.apply(&col, &data.dims, true);
            wg[j * m..(j + 1) * m].copy_from_slice(&scaled);
        }
        let qr = HouseholderQr::new(wg, m, n)?;
        Some(Self { data, scaling, qr })
    }

    /// With `Ĝ = W⁻¹G = Q₁R`, `ŵ = W⁻¹bz` and `Qᵀŵ = (t₁, t₂)`:
    /// `u = R⁻ᵀbx`, `dx = R⁻¹(u + t₁)`, `W dz = Q (u, −t₂)`.
    fn reduced(&self, bx: &[f64], bz: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, d) = (self.data.n, &self.data.dims);
        let mut t = self.scaling.apply(bz, d, true);
        self.qr.apply_qt(&mut t);
        let u = self.qr.solve_rt(bx);
        let rhs: Vec<f64> = u.iter().zip(&t[..n]).map(|(a, b)| a + b).collect();
        let dx = self.qr.solve_r(&rhs);
        let mut zhat = t;
        zhat[..n].copy_from_slice(&u);
        for v in zhat[n..].iter_mut() {
            *v = -*v;
        }
        self.qr.apply_q(&mut zhat);
        let dz = self.scaling.apply(&zhat, d, true);
        (dx, dz)
    }

    fn w2(&self, v: &[f64]) -> Vec<f64> {
        let d = &self.data.dims;
        let t = self.scaling.apply(v, d, false);
        self.scaling.apply(&t, d, false)
    }

    /// Solves `Gᵀdz = bx`, `G dx − W² dz = bz`.
    fn solve(&self, bx: &[f64], bz: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut dx, mut dz) = self.reduced(bx, bz);
        for _ in 0..3 {
            let r1: Vec<f64> = bx.iter().zip(self.data.gt_mul(&dz)).map(|(a, b)| a - b).collect();
            let gdx = self.data.g_mul(&dx);
            let w2dz = self.w2(&dz);
            let r2: Vec<f64> = (0..self.data.m).map(|i| bz[i] - (gdx[i] - w2dz[i])).collect();
            let (cx, cz) = self.reduced(&r1, &r2);
            for (a, b) in dx.iter_mut().zip(&cx) {
                *a += b;
            }
            for (a, b) in dz.iter_mut().zip(&cz) {
                *a += b;
            }
        }
        (dx, dz)
    }
}

struct Direction {
    dx: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    tau: f64,
    kappa: f64,
}

/// Residual summary of the current iterate, normalized by `τ`.
struct Health {
    pres: f64,
    dres: f64,
    gap: f64,
    pcost: f64,
    dcost: f64,
}

fn health(data: &Standard, it: &Iterate) -> Health {
    let tau = it.tau;
    let x: Vec<f64> = it.x.iter().map(|v| v / tau).collect();
    let s: Vec<f64> = it.s.iter().map(|v| v / tau).collect();
    let z: Vec<f64> = it.z.iter().map(|v| v / tau).collect();
    let gx = data.g_mul(&x);
    let rp: Vec<f64> = (0..data.m).map(|i| gx[i] + s[i] - data.h[i]).collect();
    let gtz = data.gt_mul(&z);
    let rd: Vec<f64> = gtz.iter().zip(&data.c).map(|(a, b)| a + b).collect();
    Health {
        pres: norm_inf(&rp) / (1.0 + norm_inf(&data.h)),
        dres: norm_inf(&rd) / (1.0 + norm_inf(&data.c)),
        gap: dot(&s, &z),
        pcost: dot(&data.c, &x),
        dcost: -dot(&data.h, &z),
    }
}

/// Cone violation of `v` (0 when inside `K`).
fn cone_violation(v: &[f64], dims: &ConeDims) -> f64 {
    let mut worst = 0.0_f64;
    for &x in v.iter().take(dims.orthant) {
        worst = worst.max(-x);
    }
    for (off, q) in dims.soc_blocks() {
        let b = &v[off..off + q];
        worst = worst.max(norm(&b[1..]) - b[0]);
    }
    worst.max(0.0)
}

pub fn solve(program: &ConeProgram) -> ConeSolution {
    if program.validate().is_err() {
        return ConeSolution {
            status: SolveStatus::NumericalFailure,
            primal: vec![0.0; program.num_vars],
            objective_value: f64::NAN,
            duality_gap: f64::INFINITY,
            max_violation: f64::INFINITY,
            iterations: 0,
        };
    }
    let data = Standard::from_program(program);
    let dims = data.dims.clone();
    let deg = dims.degree() as f64;
    let e = identity_element(&dims);

    let mut it = Iterate {
        x: vec![0.0; data.n],
        s: e.clone(),
        z: e.clone(),
        tau: 1.0,
        kappa: 1.0,
    };

    let finish = |it: &Iterate, status: SolveStatus, iterations: usize| -> ConeSolution {
        let x: Vec<f64> = it.x.iter().map(|v| v / it.tau).collect();
        let z: Vec<f64> = it.z.iter().map(|v| v / it.tau).collect();
        let hl = health(&data, it);
        let gx = data.g_mul(&x);
        let slack: Vec<f64> = (0..data.m).map(|i| data.h[i] - gx[i]).collect();
        let hscale = 1.0 + norm_inf(&data.h);
        let violation = hl
            .pres
            .max(hl.dres)
            .max(cone_violation(&slack, &dims) / hscale)
            .max(cone_violation(&z, &dims) / (1.0 + norm_inf(&z)));
        let objective_value = program.objective_value(&x);
        ConeSolution {
            status,
            primal: x,
            objective_value,
            duality_gap: hl.gap.max(0.0),
            max_violation: violation,
            iterations,
        }
    };

    let mut best = (it.clone(), f64::INFINITY, 0);
    let hnorm = norm(&data.h).max(1.0);
    let cnorm = norm(&data.c).max(1.0);

    for iter in 0..MAX_ITERS {
        let gx = data.g_mul(&it.x);
        let gtz = data.gt_mul(&it.z);
        let rx: Vec<f64> = (0..data.n).map(|j| gtz[j] + data.c[j] * it.tau).collect();
        let rz: Vec<f64> = (0..data.m)
            .map(|i| it.s[i] + gx[i] - data.h[i] * it.tau)
            .collect();
        let ctx = dot(&data.c, &it.x);
        let htz = dot(&data.h, &it.z);
        let rt = it.kappa + ctx + htz;
        let sz = dot(&it.s, &it.z);
        let mu = (sz + it.tau * it.kappa) / (deg + 1.0);

        let hl = health(&data, &it);
        let rel_gap = hl.gap / (1.0 + hl.pcost.abs().min(hl.dcost.abs()));
        let merit = hl.pres.max(hl.dres).max(rel_gap);
        if merit < best.1 {
            best = (it.clone(), merit, iter);
        }
        if hl.pres <= FEAS_TOL && hl.dres <= FEAS_TOL && (hl.gap <= GAP_TOL || rel_gap <= GAP_TOL) {
            return finish(&it, SolveStatus::Optimal, iter);
        }
        if htz < 0.0 && norm(&gtz) / (-htz) * hnorm <= CERT_TOL {
            return finish(&it, SolveStatus::Infeasible, iter);
        }
        if ctx < 0.0 {
            let gxs: Vec<f64> = (0..data.m).map(|i| gx[i] + it.s[i]).collect();
            if norm(&gxs) / (-ctx) * cnorm <= CERT_TOL {
                return finish(&it, SolveStatus::Unbounded, iter);
            }
        }

        // stagnation: complementarity is exhausted but the residuals stopped improving
        if iter > best.2 + 4 {
            return stalled(&best.0, best.2, iter, &finish);
        }

        let scaling = Scaling::new(&it.s, &it.z, &dims);
        let lambda = scaling.apply(&it.z, &dims, false);
        let Some(kkt) = KktSolver::new(&data, &scaling) else {
            return stalled(&best.0, best.2, iter, &finish);
        };
        let neg_h: Vec<f64> = data.c.iter().map(|v| -v).collect();
        let (x2, z2) = kkt.solve(&neg_h, &data.h);
        let denom_base = dot(&data.c, &x2) + dot(&data.h, &z2);

        let direction = |scale_res: f64, bs: &[f64], bkappa: f64| -> Direction {
            let bx: Vec<f64> = rx.iter().map(|v| -scale_res * v).collect();
            let bz: Vec<f64> = rz.iter().map(|v| -scale_res * v).collect();
            let bt = -scale_res * rt;
            let q = jordan_div(&lambda, bs, &dims);
            let wq = scaling.apply(&q, &dims, false);
            let rhs_z: Vec<f64> = bz.iter().zip(&wq).map(|(a, b)| a - b).collect();
            let (x1, z1) = kkt.solve(&bx, &rhs_z);
            let num = bkappa - it.tau * bt + it.tau * (dot(&data.c, &x1) + dot(&data.h, &z1));
            let den = it.kappa - it.tau * denom_base;
            let dtau = num / den;
            let dx: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + dtau * b).collect();
            let dz: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a + dtau * b).collect();
            // ds from the primal equation rather than through W, so scaling
            // round-off cannot feed back into the primal residual
            let gdx = data.g_mul(&dx);
            let ds: Vec<f64> = (0..data.m)
                .map(|i| bz[i] - gdx[i] + data.h[i] * dtau)
                .collect();
            let dkappa = (bkappa - it.kappa * dtau) / it.tau;
            Direction {
                dx,
                dz,
                ds,
                dtau,
                dkappa,
            }
        };

        let step_len = |d: &Direction| -> f64 {
            let mut a = max_step(&it.s, &d.ds, &dims).min(max_step(&it.z, &d.dz, &dims));
            if d.dtau < 0.0 {
                a = a.min(-it.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-it.kappa / d.dkappa);
            }
            a
        };

        // predictor
        let ll = jordan(&lambda, &lambda, &dims);
        let bs_aff: Vec<f64> = ll.iter().map(|v| -v).collect();
        let aff = direction(1.0, &bs_aff, -it.tau * it.kappa);
        let alpha_aff = step_len(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // corrector
        let ws = scaling.apply(&aff.ds, &dims, true);
        let wz = scaling.apply(&aff.dz, &dims, false);
        let cross = jordan(&ws, &wz, &dims);
        let bs: Vec<f64> = (0..data.m)
            .map(|i| -ll[i] - cross[i] + sigma * mu * e[i])
            .collect();
        let bkappa = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = direction(1.0 - sigma, &bs, bkappa);
        let alpha = (STEP_FRACTION * step_len(&dir)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-12 {
            return stalled(&best.0, best.2, iter, &finish);
        }

        for (v, d) in it.x.iter_mut().zip(&dir.dx) {
            *v += alpha * d;
        }
        for (v, d) in it.s.iter_mut().zip(&dir.ds) {
            *v += alpha * d;
        }
        for (v, d) in it.z.iter_mut().zip(&dir.dz) {
            *v += alpha * d;
        }
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;

        if !(it.tau > 0.0) || it.x.iter().chain(&it.s).chain(&it.z).any(|v| !v.is_finite()) {
            return stalled(&best.0, best.2, iter + 1, &finish);
        }
    }
    stalled(&best.0, best.2, MAX_ITERS, &finish)
}

/// Exit when progress stops: accept the iterate if it is already within the
/// looser tolerance, otherwise report why it stopped.
fn stalled(
    it: &Iterate,
    best_iter: usize,
    iter: usize,
    finish: impl Fn(&Iterate, SolveStatus, usize) -> ConeSolution,
) -> ConeSolution {
    let sol = finish(it, SolveStatus::Optimal, best_iter);
    let rel_gap = sol.duality_gap / (1.0 + sol.objective_value.abs());
    if sol.max_violation <= ACCEPT_TOL && rel_gap <= ACCEPT_TOL {
        return sol;
    }
    let status = if iter >= MAX_ITERS {
        SolveStatus::MaxIters
    } else {
        SolveStatus::NumericalFailure
    };
    ConeSolution { status, ..sol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::program::{AffineExpr, RotatedCone};

    fn single_var(cones: Vec<RotatedCone>, linear: Vec<AffineExpr>, cost: f64) -> ConeProgram {
        ConeProgram {
            num_vars: 1,
            var_names: vec!["z".into()],
            objective: vec![cost],
            objective_offset: 0.0,
            cones,
            linear,
        }
    }

    #[test]
    fn nt_scaling_identities() {
        let dims = ConeDims {
            orthant: 2,
            soc: vec![3, 3],
        };
        let s = vec![1.5, 0.2, 2.0, 0.3, -1.1, 1.0, 0.1, 0.2];
        let z = vec![0.7, 3.0, 1.2, -0.4, 0.5, 4.0, -2.0, 1.5];
        let w = Scaling::new(&s, &z, &dims);
        let wz = w.apply(&z, &dims, false);
        let winv_s = w.apply(&s, &dims, true);
        for (a, b) in wz.iter().zip(&winv_s) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let round = w.apply(&w.apply(&s, &dims, true), &dims, false);
        for (a, b) in round.iter().zip(&s) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_division_inverts_product() {
        let dims = ConeDims {
            orthant: 1,
            soc: vec![3],
        };
        let l = vec![2.0, 1.5, 0.3, -0.4];
        let x = vec![0.7, 0.1, -2.0, 3.0];
        let r = jordan(&l, &x, &dims);
        let back = jordan_div(&l, &r, &dims);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn step_to_boundary() {
        let dims = ConeDims {
            orthant: 0,
            soc: vec![3],
        };
        // (1,0,0) + α(−2,0,0) leaves through the apex at α = 1/2
        assert!((max_step(&[1.0, 0.0, 0.0], &[-2.0, 0.0, 0.0], &dims) - 0.5).abs() < 1e-15);
        // (1,0,0) + α(0,1,0) hits t = |y| at α = 1
        assert!((max_step(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &dims) - 1.0).abs() < 1e-15);
        assert_eq!(max_step(&[1.0, 0.0, 0.0], &[1.0, 0.5, 0.0], &dims), f64::INFINITY);
    }

    #[test]
    fn rotated_cone_with_constant_sides() {
        // minimize z s.t. z·1 ≥ 3²
        let p = single_var(
            vec![RotatedCone::new(AffineExpr::var(0), AffineExpr::constant(1.0), AffineExpr::constant(3.0))],
            vec![],
            1.0,
        );
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal[0] - 9.0).abs() < 1e-8, "{}", sol.primal[0]);
        assert!(sol.is_healthy());
    }

    #[test]
    fn nonnegativity_only() {
        let p = single_var(vec![], vec![AffineExpr::var(0)], 1.0);
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.primal[0].abs() < 1e-8);
    }

    #[test]
    fn detects_infeasible() {
        // z ≥ 1 and z ≤ −1
        let p = single_var(
            vec![],
            vec![AffineExpr::var(0).offset(-1.0), AffineExpr::term(0, -1.0).offset(-1.0)],
            1.0,
        );
        assert_eq!(solve(&p).status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // minimize −z s.t. z ≥ 0
        let p = single_var(vec![], vec![AffineExpr::var(0)], -1.0);
        assert_eq!(solve(&p).status, SolveStatus::Unbounded);
    }

    #[test]
    fn small_lp() {
        // minimize −x − y s.t. x + 2y ≤ 4, 3x + y ≤ 6, x, y ≥ 0 → (1.6, 1.2)
        let p = ConeProgram {
            num_vars: 2,
            var_names: vec!["x".into(), "y".into()],
            objective: vec![-1.0, -1.0],
            objective_offset: 0.0,
            cones: vec![],
            linear: vec![
                AffineExpr::constant(4.0).plus(0, -1.0).plus(1, -2.0),
                AffineExpr::constant(6.0).plus(0, -3.0).plus(1, -1.0),
                AffineExpr::var(0),
                AffineExpr::var(1),
            ],
        };
        let sol = solve(&p);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal[0] - 1.6).abs() < 1e-8);
        assert!((sol.primal[1] - 1.2).abs() < 1e-8);
        assert!(sol.is_healthy());
    }
}
