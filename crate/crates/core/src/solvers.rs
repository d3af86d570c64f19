//! Solvers for the weighted-L1 subproblems produced by local linear
//! approximation of a penalty.
//!
//! * [`lasso_weighted`]: cyclic coordinate descent for
//!   `½βᵀGβ − bᵀβ + Σ wⱼ|βⱼ|`.
//! * [`glasso_weighted`]: `tr(SΩ) − log|Ω| + Σ_{i≠j} wᵢⱼ|ωᵢⱼ|` by block
//!   coordinate descent over columns. Each column is a lasso on the
//!   `(p−1)`-dimensional subproblem and both `Ω` and `Σ = Ω⁻¹` are carried
//!   along, so every iterate is positive definite and the objective never
//!   increases.
//! * [`prox_covariance_weighted`]: `tr(SΣ⁻¹) + log|Σ| + Σ_{i≠j} wᵢⱼ|σᵢⱼ|` by
//!   proximal gradient with backtracking that only accepts positive-definite
//!   iterates.

use crate::error::{Error, Result};
use crate::matrix::{cholesky_factor, dot, log_det_from_factor, SymMatrix};

/// Off-diagonal penalty weights; symmetric, non-negative, zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        for i in 0..dim {
            if data[i * dim + i] != 0.0 {
                return Err(Error::invalid("weight matrix diagonal must be zero"));
            }
            for j in 0..i {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if a != b {
                    return Err(Error::invalid("weight matrix must be symmetric"));
                }
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::invalid("weights must be finite and non-negative"));
                }
            }
        }
        Ok(WeightMatrix { dim, data })
    }

    /// Weights `f(i, j)` for `i < j`, mirrored; diagonal zero.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self::new(dim, data)
    }

    pub fn uniform(dim: usize, w: f64) -> Result<Self> {
        Self::from_fn(dim, |_, _| w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn min_offdiag(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                m = m.min(self.get(i, j));
            }
        }
        m
    }

    pub fn max_offdiag(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                m = m.max(self.get(i, j));
            }
        }
        m
    }

    pub fn permuted(&self, perm: &[usize]) -> WeightMatrix {
        let p = self.dim;
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] = self.get(perm[i], perm[j]);
            }
        }
        WeightMatrix { dim: p, data }
    }

    /// `Σ_{i≠j} wᵢⱼ|aᵢⱼ|`.
    pub fn weighted_l1(&self, a: &SymMatrix) -> f64 {
        self.data.iter().zip(a.data()).map(|(w, x)| w * x.abs()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative parameter-change tolerance.
    pub tol: f64,
    /// Cap on full sweeps (or proximal steps).
    pub max_sweeps: usize,
    /// Step shrink factor used when backtracking, in `(0, 1)`.
    pub pd_backtrack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_sweeps: 500,
            pd_backtrack: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        if self.max_sweeps < 1 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        if !(self.pd_backtrack > 0.0 && self.pd_backtrack < 1.0) {
            return Err(Error::invalid("pd_backtrack must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Solver output: the final iterate, sweeps used and whether the stopping
/// rule was met before the sweep cap.
#[derive(Clone, Debug)]
pub struct Solved<T> {
    pub value: T,
    pub sweeps: usize,
    pub converged: bool,
}

impl<T> Solved<T> {
    /// Turns an unconverged result into [`Error::NonConvergence`].
    pub fn require_converged(self, what: &'static str) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                what,
                iterations: self.sweeps,
            })
        }
    }
}

/// `sign(z)·max(|z| − t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Access to a positive semidefinite Gram matrix without materializing it.
pub(crate) trait Gram {
    fn len(&self) -> usize;
    fn diag(&self, k: usize) -> f64;
    /// `out[l] += delta · G[k][l]` for every `l`.
    fn axpy_row(&self, k: usize, delta: f64, out: &mut [f64]);
}

/// Leading `k × k` block of a symmetric matrix, scaled by `scale`.
pub(crate) struct LeadingBlock<'a> {
    pub s: &'a SymMatrix,
    pub k: usize,
    pub scale: f64,
}

impl Gram for LeadingBlock<'_> {
    fn len(&self) -> usize {
        self.k
    }
    fn diag(&self, k: usize) -> f64 {
        self.scale * self.s.get(k, k)
    }
    fn axpy_row(&self, k: usize, delta: f64, out: &mut [f64]) {
        let d = delta * self.scale;
        for (o, g) in out.iter_mut().zip(&self.s.row(k)[..self.k]) {
            *o += d * g;
        }
    }
}

/// `Θ₁₁⁻¹ = W₁₁ − w₁₂w₁₂ᵀ/w₂₂` for the column `j` partition of `W = Ω⁻¹`.
/// Index `k` of the subproblem is variable `k` for `k < j` and `k + 1`
/// otherwise.
struct ColumnGram<'a> {
    w: &'a [f64],
    p: usize,
    j: usize,
    /// `w₁₂` in subproblem order.
    col: &'a [f64],
}

impl ColumnGram<'_> {
    fn var(&self, k: usize) -> usize {
        if k < self.j {
            k
        } else {
            k + 1
        }
    }
}

/// `out[l] += a·x[l] + b·y[l]` over a split row that skips index `j`.
#[inline]
fn axpy_skip(out: &mut [f64], a: f64, row: &[f64], b: f64, col: &[f64], j: usize) {
    let (out_lo, out_hi) = out.split_at_mut(j);
    let (col_lo, col_hi) = col.split_at(j);
    for ((o, r), c) in out_lo.iter_mut().zip(&row[..j]).zip(col_lo) {
        *o += a * r + b * c;
    }
    for ((o, r), c) in out_hi.iter_mut().zip(&row[j + 1..]).zip(col_hi) {
        *o += a * r + b * c;
    }
}

impl Gram for ColumnGram<'_> {
    fn len(&self) -> usize {
        self.p - 1
    }
    fn diag(&self, k: usize) -> f64 {
        let ik = self.var(k);
        let wkj = self.col[k];
        self.w[ik * self.p + ik] - wkj * wkj / self.w[self.j * self.p + self.j]
    }
    fn axpy_row(&self, k: usize, delta: f64, out: &mut [f64]) {
        let (p, j) = (self.p, self.j);
        let ik = self.var(k);
        let row = &self.w[ik * p..(ik + 1) * p];
        let c = -delta * self.col[k] / self.w[j * p + j];
        axpy_skip(out, delta, row, c, self.col, j);
    }
}

/// Coordinate descent in place. `gb` must hold `G·β` on entry and is kept
/// current. Stops when the largest coordinate change in a sweep is at most
/// `tol` times the largest coefficient magnitude.
pub(crate) fn lasso_cd<G: Gram>(
    g: &G,
    b: &[f64],
    w: &[f64],
    beta: &mut [f64],
    gb: &mut [f64],
    tol: f64,
    max_sweeps: usize,
) -> (usize, bool) {
    let m = g.len();
    for sweep in 1..=max_sweeps {
        let mut max_delta = 0.0_f64;
        let mut max_beta = 0.0_f64;
        for k in 0..m {
            let gkk = g.diag(k);
            let old = beta[k];
            let z = b[k] - (gb[k] - gkk * old);
            let new = soft_threshold(z, w[k]) / gkk;
            let delta = new - old;
            if delta != 0.0 {
                g.axpy_row(k, delta, gb);
                beta[k] = new;
                max_delta = max_delta.max(delta.abs());
            }
            max_beta = max_beta.max(new.abs());
        }
        if max_delta <= tol * max_beta {
            return (sweep, true);
        }
    }
    (max_sweeps, false)
}

fn check_lasso_inputs(g: &SymMatrix, b: &[f64], w: &[f64]) -> Result<()> {
    let m = g.dim();
    for len in [b.len(), w.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: len,
            });
        }
    }
    if let Some(k) = (0..m).find(|&k| !(g.get(k, k) > 0.0)) {
        return Err(Error::invalid(format!("Gram diagonal entry {k} is not positive")));
    }
    if w.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::invalid("lasso weights must be non-negative"));
    }
    Ok(())
}

/// Minimizes `½βᵀGβ − bᵀβ + Σ wⱼ|βⱼ|` by cyclic coordinate descent from zero.
pub fn lasso_weighted(g: &SymMatrix, b: &[f64], w: &[f64], opts: &SolverOptions) -> Result<Solved<Vec<f64>>> {
    lasso_weighted_from(g, b, w, &vec![0.0; g.dim()], opts)
}

/// As [`lasso_weighted`], starting from `init`.
pub fn lasso_weighted_from(
    g: &SymMatrix,
    b: &[f64],
    w: &[f64],
    init: &[f64],
    opts: &SolverOptions,
) -> Result<Solved<Vec<f64>>> {
    opts.validate()?;
    check_lasso_inputs(g, b, w)?;
    if init.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: init.len(),
        });
    }
    let mut beta = init.to_vec();
    let mut gb = g.mul_vec(&beta);
    let block = LeadingBlock {
        s: g,
        k: g.dim(),
        scale: 1.0,
    };
    let (sweeps, converged) = lasso_cd(&block, b, w, &mut beta, &mut gb, opts.tol, opts.max_sweeps);
    Ok(Solved {
        value: beta,
        sweeps,
        converged,
    })
}

/// `tr(SΩ) − log|Ω| + Σ_{i≠j} wᵢⱼ|ωᵢⱼ|`, or `+∞` when `Ω` is not positive
/// definite.
pub fn weighted_precision_objective(s: &SymMatrix, omega: &SymMatrix, w: &WeightMatrix) -> f64 {
    match cholesky_factor(omega) {
        Ok(l) => s.trace_product(omega) - log_det_from_factor(&l) + w.weighted_l1(omega),
        Err(_) => f64::INFINITY,
    }
}

/// `tr(SΣ⁻¹) + log|Σ| + Σ_{i≠j} wᵢⱼ|σᵢⱼ|`, or `+∞` when `Σ` is not positive
/// definite.
pub fn weighted_covariance_objective(s: &SymMatrix, sigma: &SymMatrix, w: &WeightMatrix) -> f64 {
    match smooth_covariance_part(s, sigma) {
        Some((f, _)) => f + w.weighted_l1(sigma),
        None => f64::INFINITY,
    }
}

fn check_square_pair(s: &SymMatrix, w: &WeightMatrix, init: &SymMatrix) -> Result<()> {
    for d in [w.dim(), init.dim()] {
        if d != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                found: d,
            });
        }
    }
    if let Some(i) = (0..s.dim()).find(|&i| !(s.get(i, i) > 0.0)) {
        return Err(Error::DegenerateColumn { column: i });
    }
    Ok(())
}

/// How much of the off-diagonal must carry positive weight when `S` is
/// singular.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum SingularGuard {
    /// Every off-diagonal weight must be positive.
    AllPenalized,
    /// Only the fully unpenalized problem is rejected.
    AnyPenalized,
}

fn guard_singular(s: &SymMatrix, w: &WeightMatrix, guard: SingularGuard) -> Result<()> {
    if s.dim() < 2 || cholesky_factor(s).is_ok() {
        return Ok(());
    }
    let unbounded = match guard {
        SingularGuard::AllPenalized => w.min_offdiag() <= 0.0,
        SingularGuard::AnyPenalized => w.max_offdiag() <= 0.0,
    };
    if unbounded {
        Err(Error::SingularUnpenalized)
    } else {
        Ok(())
    }
}

/// Weighted graphical lasso started from `diag(1/sᵢᵢ)`.
pub fn glasso_weighted(s: &SymMatrix, w: &WeightMatrix, opts: &SolverOptions) -> Result<Solved<SymMatrix>> {
    let init = SymMatrix::from_diag(&s.diagonal().iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    check_square_pair(s, w, &init)?;
    guard_singular(s, w, SingularGuard::AllPenalized)?;
    glasso_core(s, w, &init, opts)
}

/// Weighted graphical lasso warm-started from a positive-definite `init`.
pub fn glasso_weighted_from(
    s: &SymMatrix,
    w: &WeightMatrix,
    init: &SymMatrix,
    opts: &SolverOptions,
) -> Result<Solved<SymMatrix>> {
    check_square_pair(s, w, init)?;
    guard_singular(s, w, SingularGuard::AllPenalized)?;
    glasso_core(s, w, init, opts)
}

pub(crate) fn glasso_guarded(
    s: &SymMatrix,
    w: &WeightMatrix,
    init: &SymMatrix,
    opts: &SolverOptions,
    guard: SingularGuard,
) -> Result<Solved<SymMatrix>> {
    check_square_pair(s, w, init)?;
    guard_singular(s, w, guard)?;
    glasso_core(s, w, init, opts)
}

fn glasso_core(s: &SymMatrix, w: &WeightMatrix, init: &SymMatrix, opts: &SolverOptions) -> Result<Solved<SymMatrix>> {
    opts.validate()?;
    let p = s.dim();
    let mut omega = init.data().to_vec();
    if p == 1 {
        return Ok(Solved {
            value: SymMatrix::from_diag(&[1.0 / s.get(0, 0)]),
            sweeps: 1,
            converged: true,
        });
    }
    let inner_tol = 0.1 * opts.tol;
    let inner_cap = opts.max_sweeps.max(1000);
    let mut others = Vec::with_capacity(p - 1);
    let mut b = vec![0.0; p - 1];
    let mut wts = vec![0.0; p - 1];
    let mut theta = vec![0.0; p - 1];
    let mut u = vec![0.0; p - 1];
    let mut col = vec![0.0; p - 1];
    let mut inner_ok = true;
    for sweep in 1..=opts.max_sweeps {
        let mut wmat = SymMatrix::from_raw(p, omega.clone()).inverse()?.data().to_vec();
        let mut change = 0.0;
        for j in 0..p {
            others.clear();
            others.extend((0..p).filter(|&k| k != j));
            let sjj = s.get(j, j);
            // column subproblem in θ = ω₋ⱼ,ⱼ:
            //   ½θᵀΘ₁₁⁻¹θ + (s₁₂/sⱼⱼ)ᵀθ + Σ (wₖⱼ/sⱼⱼ)|θₖ|
            for (k, &ik) in others.iter().enumerate() {
                b[k] = -s.get(ik, j) / sjj;
                wts[k] = w.get(ik, j) / sjj;
                theta[k] = omega[ik * p + j];
                col[k] = wmat[ik * p + j];
            }
            let gram = ColumnGram {
                w: &wmat,
                p,
                j,
                col: &col,
            };
            u.iter_mut().for_each(|x| *x = 0.0);
            for k in 0..p - 1 {
                if theta[k] != 0.0 {
                    gram.axpy_row(k, theta[k], &mut u);
                }
            }
            let (_, ok) = lasso_cd(&gram, &b, &wts, &mut theta, &mut u, inner_tol, inner_cap);
            inner_ok &= ok;
            let theta22 = 1.0 / sjj + dot(&theta, &u);

            // W₁₁ ← Θ₁₁⁻¹ + sⱼⱼ·u·uᵀ, w₁₂ ← −sⱼⱼ·u, w₂₂ ← sⱼⱼ
            let wjj = wmat[j * p + j];
            for (a, &ia) in others.iter().enumerate() {
                let ca = -col[a] / wjj;
                let ua = sjj * u[a];
                let row = &mut wmat[ia * p..(ia + 1) * p];
                let (lo, hi) = row.split_at_mut(j);
                for ((r, uc), cc) in lo.iter_mut().zip(&u[..j]).zip(&col[..j]) {
                    *r += ua * uc + ca * cc;
                }
                for ((r, uc), cc) in hi[1..].iter_mut().zip(&u[j..]).zip(&col[j..]) {
                    *r += ua * uc + ca * cc;
                }
            }
            for (a, &ia) in others.iter().enumerate() {
                let v = -sjj * u[a];
                wmat[ia * p + j] = v;
                wmat[j * p + ia] = v;
            }
            wmat[j * p + j] = sjj;

            for (k, &ik) in others.iter().enumerate() {
                change += 2.0 * (theta[k] - omega[ik * p + j]).abs();
                omega[ik * p + j] = theta[k];
                omega[j * p + ik] = theta[k];
            }
            change += (theta22 - omega[j * p + j]).abs();
            omega[j * p + j] = theta22;
        }
        let mean_change = change / (p * p) as f64;
        let mean_diag = (0..p).map(|i| omega[i * p + i].abs()).sum::<f64>() / p as f64;
        if mean_change <= opts.tol * mean_diag {
            return Ok(Solved {
                value: SymMatrix::from_raw(p, omega),
                sweeps: sweep,
                converged: inner_ok,
            });
        }
    }
    Ok(Solved {
        value: SymMatrix::from_raw(p, omega),
        sweeps: opts.max_sweeps,
        converged: false,
    })
}

/// `(tr(SΣ⁻¹) + log|Σ|, Σ⁻¹ − Σ⁻¹SΣ⁻¹)`, or `None` if `Σ` is not positive
/// definite.
fn smooth_covariance_part(s: &SymMatrix, sigma: &SymMatrix) -> Option<(f64, SymMatrix)> {
    let l = cholesky_factor(sigma).ok()?;
    let inv = l.inverse_product().ok()?;
    let value = s.trace_product(&inv) + log_det_from_factor(&l);
    let inv_s_inv = sandwich(&inv, s);
    let grad = inv.sub(&inv_s_inv).ok()?;
    Some((value, grad))
}

/// `A·B·A` for symmetric `A`, `B`.
fn sandwich(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let p = a.dim();
    let ab = a.matmul(b);
    SymMatrix::from_fn(p, |i, j| dot(ab.row(i), a.row(j)))
}

/// Weighted L1-penalized covariance estimate by proximal gradient from a
/// positive-definite `init`.
pub fn prox_covariance_weighted(
    s: &SymMatrix,
    w: &WeightMatrix,
    init: &SymMatrix,
    opts: &SolverOptions,
) -> Result<Solved<SymMatrix>> {
    check_square_pair(s, w, init)?;
    guard_singular(s, w, SingularGuard::AllPenalized)?;
    prox_covariance_core(s, w, init, opts, false)
}

pub(crate) fn prox_covariance_guarded(
    s: &SymMatrix,
    w: &WeightMatrix,
    init: &SymMatrix,
    opts: &SolverOptions,
    guard: SingularGuard,
    pin_diagonal: bool,
) -> Result<Solved<SymMatrix>> {
    check_square_pair(s, w, init)?;
    guard_singular(s, w, guard)?;
    prox_covariance_core(s, w, init, opts, pin_diagonal)
}

const MAX_BACKTRACKS: usize = 80;

fn prox_covariance_core(
    s: &SymMatrix,
    w: &WeightMatrix,
    init: &SymMatrix,
    opts: &SolverOptions,
    pin_diagonal: bool,
) -> Result<Solved<SymMatrix>> {
    opts.validate()?;
    let (mut fx, mut grad) = smooth_covariance_part(s, init).ok_or(Error::NotPositiveDefinite {
        index: 0,
        pivot: f64::NAN,
    })?;
    let mut x = init.clone();
    let mut obj = fx + w.weighted_l1(&x);
    let grad_norm = free_norm(&grad, pin_diagonal);
    if (grad_norm == 0.0 && w.max_offdiag() == 0.0) || prox_residual_small(&x, &grad, w, opts.tol, pin_diagonal) {
        return Ok(Solved {
            value: x,
            sweeps: 0,
            converged: true,
        });
    }
    let mut step = if grad_norm > 0.0 { 1.0 / grad_norm } else { 1.0 };
    for iter in 1..=opts.max_sweeps {
        let mut t = step;
        let mut accepted = None;
        // function values near the optimum agree to roundoff
        let slack = 16.0 * f64::EPSILON * obj.abs().max(1.0);
        for _ in 0..MAX_BACKTRACKS {
            let y = prox_step(&x, &grad, w, t, pin_diagonal);
            if let Some((fy, gy)) = smooth_covariance_part(s, &y) {
                let diff = y.sub(&x)?;
                let model = fx + grad.trace_product(&diff) + diff.trace_product(&diff) / (2.0 * t);
                let obj_y = fy + w.weighted_l1(&y);
                if fy <= model + slack && obj_y <= obj + slack {
                    accepted = Some((y, fy, gy, obj_y, diff));
                    break;
                }
            }
            t *= opts.pd_backtrack;
        }
        let Some((y, fy, gy, obj_y, diff)) = accepted else {
            // no step of any size decreases the objective: stationary to
            // working precision
            return Ok(Solved {
                value: x,
                sweeps: iter,
                converged: true,
            });
        };
        // Barzilai–Borwein step for the next iteration
        let dg = gy.sub(&grad)?;
        let sy = diff.trace_product(&dg);
        let ss = diff.trace_product(&diff);
        step = if sy > 0.0 { (ss / sy).clamp(1e-12 * t, 1e6 * t.max(1e-12)) } else { 2.0 * t };

        x = y;
        fx = fy;
        grad = gy;
        obj = obj_y;
        if prox_residual_small(&x, &grad, w, opts.tol, pin_diagonal) {
            return Ok(Solved {
                value: x,
                sweeps: iter,
                converged: true,
            });
        }
    }
    Ok(Solved {
        value: x,
        sweeps: opts.max_sweeps,
        converged: false,
    })
}

/// Proximal-gradient residual at the fixed reference step mean_diag², which
/// makes the test invariant to rescaling S.
fn prox_residual_small(x: &SymMatrix, grad: &SymMatrix, w: &WeightMatrix, tol: f64, pin_diagonal: bool) -> bool {
    let p = x.dim();
    let mean_diag = x.diagonal().iter().map(|v| v.abs()).sum::<f64>() / p as f64;
    let probe = prox_step(x, grad, w, mean_diag * mean_diag, pin_diagonal);
    let residual = probe.data().iter().zip(x.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() / (p * p) as f64;
    residual <= tol * mean_diag
}

fn free_norm(g: &SymMatrix, pin_diagonal: bool) -> f64 {
    let p = g.dim();
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..p {
            if !(pin_diagonal && i == j) {
                acc += g.get(i, j).powi(2);
            }
        }
    }
    acc.sqrt()
}

fn prox_step(x: &SymMatrix, grad: &SymMatrix, w: &WeightMatrix, t: f64, pin_diagonal: bool) -> SymMatrix {
    SymMatrix::from_fn(x.dim(), |i, j| {
        if i == j {
            if pin_diagonal {
                x.get(i, i)
            } else {
                x.get(i, i) - t * grad.get(i, i)
            }
        } else {
            soft_threshold(x.get(i, j) - t * grad.get(i, j), t * w.get(i, j))
        }
    })
}
