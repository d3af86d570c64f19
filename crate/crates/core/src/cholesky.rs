//! Sparse modified-Cholesky estimators.
//!
//! The modified Cholesky decomposition writes `TΣTᵀ = D` with `T` unit lower
//! triangular; row `i` of `−T` holds the coefficients of the regression of
//! variable `i` on its predecessors and `D` their residual variances. Three
//! penalized criteria are supported, all penalizing the strictly-lower
//! entries of `T`:
//!
//! * ML: `tr(TᵀD⁻¹TS) + log|D| + 2Σ p_λ(|tᵢⱼ|)`, solved by alternating
//!   between the rows of `T` and `D`;
//! * LS: `tr(TᵀTS) + 2Σ p_λ(|tᵢⱼ|)`, one independent lasso per row;
//! * NL: `tr(TᵀTΓ̂_S) − 2 log|T| + 2Σ p_λ(|tᵢⱼ|)` on the sample correlation,
//!   with a free positive diagonal.

use crate::error::{Error, Result};
use crate::estimators::{check_singular_needs_penalty, CholeskyParts, EstimationResult, EstimatorConfig, Target, SUPPORT_TOL_REL};
use crate::matrix::{cholesky_factor, dot, to_correlation, DiagMatrix, LowerTriangular, SymMatrix};
use crate::penalty::Penalty;
use crate::solvers::{lasso_cd, soft_threshold, LeadingBlock};

/// Cap on ML alternations between the `T` and `D` blocks.
pub const ML_MAX_ALTERNATIONS: usize = 50;
/// Inner coordinate-descent tolerance relative to the solver tolerance.
const INNER_TOL_FACTOR: f64 = 1e-3;
/// Residual variances below this fraction of `Sᵢᵢ` are treated as vanished.
const RESIDUAL_FLOOR_REL: f64 = 1e-12;

/// `T` and `D` of a modified Cholesky decomposition `TΣTᵀ = D`.
#[derive(Clone, Debug)]
pub struct McdPair {
    pub t: LowerTriangular,
    pub d: DiagMatrix,
}

impl McdPair {
    /// `TᵀD⁻¹T`.
    pub fn precision(&self) -> SymMatrix {
        precision_from(&self.t, self.d.values())
    }

    /// `T⁻¹DT⁻ᵀ`.
    pub fn covariance(&self) -> SymMatrix {
        let tinv = self.t.inverse();
        let p = self.t.dim();
        let d = self.d.values();
        SymMatrix::from_fn(p, |i, j| {
            let k = i.min(j) + 1;
            (0..k).map(|m| tinv.get(i, m) * d[m] * tinv.get(j, m)).sum()
        })
    }
}

fn precision_from(t: &LowerTriangular, d: &[f64]) -> SymMatrix {
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    t.transpose_diag_self(&inv)
}

/// Modified Cholesky decomposition by successive regressions of each
/// variable on its predecessors.
pub fn mcd(sigma: &SymMatrix) -> Result<McdPair> {
    let p = sigma.dim();
    let l = cholesky_factor(sigma)?;
    let mut t = vec![0.0; p * p];
    let mut d = Vec::with_capacity(p);
    for i in 0..p {
        t[i * p + i] = 1.0;
        if i == 0 {
            d.push(sigma.get(0, 0));
            continue;
        }
        // leading i×i block of L is the Cholesky factor of Σ[..i, ..i]
        let lead = leading_factor(&l, i);
        let cross: Vec<f64> = (0..i).map(|j| sigma.get(j, i)).collect();
        let phi = lead.solve_transpose(&lead.solve(&cross));
        for (j, v) in phi.iter().enumerate() {
            t[i * p + j] = -v;
        }
        d.push(sigma.get(i, i) - dot(&phi, &cross));
    }
    Ok(McdPair {
        t: LowerTriangular::from_raw(p, t),
        d: DiagMatrix::new(d)?,
    })
}

fn leading_factor(l: &LowerTriangular, k: usize) -> LowerTriangular {
    let mut data = vec![0.0; k * k];
    for i in 0..k {
        data[i * k..i * k + i + 1].copy_from_slice(l.row_head(i));
    }
    LowerTriangular::from_raw(k, data)
}

/// Output of the Cholesky-factor estimators.
#[derive(Clone, Debug)]
pub struct CholeskyFit {
    pub target: Target,
    pub penalty: Penalty,
    /// Estimated factor (unit diagonal for ML and LS).
    pub t: LowerTriangular,
    /// Residual variances (ML and LS).
    pub d: Option<DiagMatrix>,
    /// Implied precision matrix.
    pub omega: SymMatrix,
    pub objective_trace: Vec<f64>,
    /// ML only: for each LLA stage, the surrogate objective after every `D`
    /// and `T` block update.
    pub half_step_trace: Vec<Vec<f64>>,
    pub converged: bool,
    pub sweeps_used: usize,
}

impl CholeskyFit {
    /// Strictly-lower nonzero entries of `T` as `(j, i)` with `j < i`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let p = self.t.dim();
        let scale = (0..p)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .fold(0.0_f64, |m, (i, j)| m.max(self.t.get(i, j).abs()));
        let tol = SUPPORT_TOL_REL * scale;
        let mut out = Vec::new();
        for i in 0..p {
            for j in 0..i {
                if self.t.get(i, j).abs() > tol {
                    out.push((j, i));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn into_result(self) -> EstimationResult {
        let support = self.support();
        EstimationResult {
            target: self.target,
            penalty: self.penalty,
            estimate: self.omega,
            companion: None,
            cholesky: Some(CholeskyParts { t: self.t, d: self.d }),
            support,
            objective_trace: self.objective_trace,
            converged: self.converged,
            sweeps_used: self.sweeps_used,
        }
    }
}

/// Coefficients `φ` of each row (`t_{i,<i} = −φ`).
type Rows = Vec<Vec<f64>>;

fn rows_to_t(rows: &Rows, diag: &[f64]) -> LowerTriangular {
    let p = rows.len();
    let mut t = vec![0.0; p * p];
    for (i, phi) in rows.iter().enumerate() {
        for (j, v) in phi.iter().enumerate() {
            t[i * p + j] = -v;
        }
        t[i * p + i] = diag[i];
    }
    LowerTriangular::from_raw(p, t)
}

/// `tᵢᵀ S tᵢ` for the unit-diagonal row `tᵢ = (−φ, 1)`.
fn row_quadratic(s: &SymMatrix, i: usize, phi: &[f64]) -> f64 {
    let mut acc = s.get(i, i);
    for (j, &pj) in phi.iter().enumerate() {
        if pj == 0.0 {
            continue;
        }
        acc -= 2.0 * pj * s.get(j, i);
        acc += pj * dot(&s.row(j)[..i], phi);
    }
    acc
}

fn row_penalty(pen: &Penalty, phi: &[f64]) -> f64 {
    phi.iter().map(|v| pen.value(*v)).sum()
}

fn row_weights(pen: &Penalty, phi: &[f64]) -> Vec<f64> {
    phi.iter().map(|v| pen.derivative(v.abs())).collect()
}

/// `tr(TᵀD⁻¹TS) + log|D| + 2Σ_{j<i} p_λ(|tᵢⱼ|)`.
pub fn ml_objective(s: &SymMatrix, t: &LowerTriangular, d: &[f64], pen: &Penalty) -> f64 {
    let p = s.dim();
    (0..p)
        .map(|i| {
            let row = t.row_head(i);
            let q = quad_lower(s, row);
            q / d[i] + d[i].ln() + 2.0 * row[..i].iter().map(|v| pen.value(*v)).sum::<f64>()
        })
        .sum()
}

/// `tr(TᵀTS) + 2Σ_{j<i} p_λ(|tᵢⱼ|)`.
pub fn ls_objective(s: &SymMatrix, t: &LowerTriangular, pen: &Penalty) -> f64 {
    (0..s.dim())
        .map(|i| {
            let row = t.row_head(i);
            quad_lower(s, row) + 2.0 * row[..i].iter().map(|v| pen.value(*v)).sum::<f64>()
        })
        .sum()
}

/// `tr(TᵀTΓ) − 2 log|T| + 2Σ_{j<i} p_λ(|tᵢⱼ|)`; `+∞` if a diagonal entry is
/// not positive.
pub fn nl_objective(gamma: &SymMatrix, t: &LowerTriangular, pen: &Penalty) -> f64 {
    (0..gamma.dim())
        .map(|i| {
            let row = t.row_head(i);
            if !(row[i] > 0.0) {
                return f64::INFINITY;
            }
            quad_lower(gamma, row) - 2.0 * row[i].ln() + 2.0 * row[..i].iter().map(|v| pen.value(*v)).sum::<f64>()
        })
        .sum()
}

/// `rᵀ A[..k, ..k] r` for a row head of length `k`.
fn quad_lower(a: &SymMatrix, row: &[f64]) -> f64 {
    let k = row.len();
    (0..k).map(|j| row[j] * dot(&a.row(j)[..k], row)).sum()
}

/// Positive root of `g t² + c t − 1 = 0`, the minimizer over `t > 0` of
/// `g t² + 2ct − 2 log t`.
pub fn nl_diagonal_root(g: f64, c: f64) -> f64 {
    2.0 / (c + (c * c + 4.0 * g).sqrt())
}

fn check_positive_diagonal(s: &SymMatrix) -> Result<()> {
    match (0..s.dim()).find(|&i| !(s.get(i, i) > 0.0)) {
        Some(i) => Err(Error::DegenerateColumn { column: i }),
        None => Ok(()),
    }
}

fn residual_variance(s: &SymMatrix, i: usize, phi: &[f64]) -> Result<f64> {
    let d = row_quadratic(s, i, phi);
    if d > RESIDUAL_FLOOR_REL * s.get(i, i) {
        Ok(d)
    } else {
        Err(Error::invalid(format!(
            "residual variance of variable {i} vanished; increase lambda"
        )))
    }
}

/// Solves one penalized row regression in place, warm-started from `phi`.
fn solve_row(s: &SymMatrix, i: usize, scale: f64, w: &[f64], phi: &mut [f64], tol: f64, cap: usize) -> (usize, bool) {
    let block = LeadingBlock { s, k: i, scale };
    let b: Vec<f64> = (0..i).map(|j| scale * s.get(j, i)).collect();
    let mut gb: Vec<f64> = (0..i).map(|j| scale * dot(&s.row(j)[..i], phi)).collect();
    lasso_cd(&block, &b, w, phi, &mut gb, tol, cap)
}

/// ML criterion by block alternation, wrapped in LLA.
pub fn estimate_cholesky_ml(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<CholeskyFit> {
    cfg.validate()?;
    check_positive_diagonal(s)?;
    check_singular_needs_penalty(s, &cfg.penalty)?;
    let p = s.dim();
    let pen = cfg.penalty;
    let inner_tol = INNER_TOL_FACTOR * cfg.solver.tol;
    let cap = cfg.solver.max_sweeps.max(1000);
    let mut rows: Rows = (0..p).map(|i| vec![0.0; i]).collect();
    let mut d: Vec<f64> = s.diagonal();
    let mut trace = Vec::new();
    let mut half = Vec::new();
    let mut converged = true;
    let mut sweeps = 0;
    let mut weights_at = rows.clone();
    let mut last_weights: Option<Rows> = None;

    let surrogate = |rows: &Rows, d: &[f64], w: &Rows| -> f64 {
        (0..p)
            .map(|i| {
                let pen_w: f64 = rows[i].iter().zip(&w[i]).map(|(x, wt)| wt * x.abs()).sum();
                row_quadratic(s, i, &rows[i]) / d[i] + d[i].ln() + 2.0 * pen_w
            })
            .sum()
    };

    for _ in 0..cfg.lla_iters {
        let w: Rows = weights_at.iter().map(|phi| row_weights(&pen, phi)).collect();
        if last_weights.as_ref() == Some(&w) {
            break;
        }
        let mut prev = f64::INFINITY;
        let mut alternation_ok = false;
        let mut stage = Vec::new();
        for _ in 0..ML_MAX_ALTERNATIONS {
            for i in 0..p {
                d[i] = residual_variance(s, i, &rows[i])?;
            }
            stage.push(surrogate(&rows, &d, &w));
            for i in 1..p {
                let (n, ok) = solve_row(s, i, 1.0 / d[i], &w[i], &mut rows[i], inner_tol, cap);
                sweeps += n;
                converged &= ok;
            }
            let q = surrogate(&rows, &d, &w);
            stage.push(q);
            if (prev - q).abs() <= cfg.solver.tol * q.abs().max(1.0) {
                alternation_ok = true;
                break;
            }
            prev = q;
        }
        converged &= alternation_ok;
        for i in 0..p {
            d[i] = residual_variance(s, i, &rows[i])?;
        }
        stage.push(surrogate(&rows, &d, &w));
        half.push(stage);
        let t = rows_to_t(&rows, &vec![1.0; p]);
        trace.push(ml_objective(s, &t, &d, &pen));
        weights_at = rows.clone();
        last_weights = Some(w);
    }
    let t = rows_to_t(&rows, &vec![1.0; p]);
    let omega = precision_from(&t, &d);
    Ok(CholeskyFit {
        target: Target::CholeskyMl,
        penalty: pen,
        t,
        d: Some(DiagMatrix::new(d)?),
        omega,
        objective_trace: trace,
        half_step_trace: half,
        converged,
        sweeps_used: sweeps,
    })
}

/// LS criterion: independent penalized regressions per row, wrapped in LLA.
/// The implied precision uses the residual variances `diag(T̂ST̂ᵀ)`.
pub fn estimate_cholesky_ls(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<CholeskyFit> {
    cfg.validate()?;
    check_positive_diagonal(s)?;
    check_singular_needs_penalty(s, &cfg.penalty)?;
    let p = s.dim();
    let pen = cfg.penalty;
    let inner_tol = INNER_TOL_FACTOR * cfg.solver.tol;
    let cap = cfg.solver.max_sweeps.max(1000);
    let mut rows: Rows = (0..p).map(|i| vec![0.0; i]).collect();
    let mut trace = Vec::new();
    let mut converged = true;
    let mut sweeps = 0;
    let mut last_weights: Option<Rows> = None;
    for _ in 0..cfg.lla_iters {
        let w: Rows = rows.iter().map(|phi| row_weights(&pen, phi)).collect();
        if last_weights.as_ref() == Some(&w) {
            break;
        }
        for i in 1..p {
            let (n, ok) = solve_row(s, i, 1.0, &w[i], &mut rows[i], inner_tol, cap);
            sweeps += n;
            converged &= ok;
        }
        trace.push(
            (0..p)
                .map(|i| row_quadratic(s, i, &rows[i]) + 2.0 * row_penalty(&pen, &rows[i]))
                .sum(),
        );
        last_weights = Some(w);
    }
    let d = (0..p)
        .map(|i| residual_variance(s, i, &rows[i]))
        .collect::<Result<Vec<_>>>()?;
    let t = rows_to_t(&rows, &vec![1.0; p]);
    let omega = precision_from(&t, &d);
    Ok(CholeskyFit {
        target: Target::CholeskyLs,
        penalty: pen,
        t,
        d: Some(DiagMatrix::new(d)?),
        omega,
        objective_trace: trace,
        half_step_trace: Vec::new(),
        converged,
        sweeps_used: sweeps,
    })
}

/// Cyclic coordinate descent on one NL row `t = (t_{i,0..i}, t_ii)`; the
/// diagonal update uses the closed-form positive root.
fn solve_nl_row(gamma: &SymMatrix, i: usize, w: &[f64], t: &mut [f64], tol: f64, cap: usize) -> (usize, bool) {
    let k = i + 1;
    let mut gt: Vec<f64> = (0..k).map(|j| dot(&gamma.row(j)[..k], t)).collect();
    for sweep in 1..=cap {
        let mut max_delta = 0.0_f64;
        let mut max_t = 0.0_f64;
        for j in 0..k {
            let gjj = gamma.get(j, j);
            let old = t[j];
            let cross = gt[j] - gjj * old;
            let new = if j < i {
                soft_threshold(-cross, w[j]) / gjj
            } else {
                nl_diagonal_root(gjj, cross)
            };
            let delta = new - old;
            if delta != 0.0 {
                for (g, a) in gt.iter_mut().zip(&gamma.row(j)[..k]) {
                    *g += delta * a;
                }
                t[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
            max_t = max_t.max(new.abs());
        }
        if max_delta <= tol * max_t {
            return (sweep, true);
        }
    }
    (cap, false)
}

/// NL criterion on the sample correlation, wrapped in LLA. The implied
/// precision is `Ŵ⁻¹T̂ᵀT̂Ŵ⁻¹`.
pub fn estimate_cholesky_nl(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<CholeskyFit> {
    cfg.validate()?;
    let (gamma, scale) = to_correlation(s)?;
    check_singular_needs_penalty(&gamma, &cfg.penalty)?;
    let p = s.dim();
    let pen = cfg.penalty;
    let inner_tol = INNER_TOL_FACTOR * cfg.solver.tol;
    let cap = cfg.solver.max_sweeps.max(1000);
    // row i holds (t_i0, …, t_ii)
    let mut rows: Rows = (0..p)
        .map(|i| {
            let mut r = vec![0.0; i + 1];
            r[i] = 1.0;
            r
        })
        .collect();
    let mut trace = Vec::new();
    let mut converged = true;
    let mut sweeps = 0;
    let mut last_weights: Option<Rows> = None;
    let to_t = |rows: &Rows| {
        let mut t = vec![0.0; p * p];
        for (i, r) in rows.iter().enumerate() {
            t[i * p..i * p + i + 1].copy_from_slice(r);
        }
        LowerTriangular::from_raw(p, t)
    };
    for _ in 0..cfg.lla_iters {
        let w: Rows = rows.iter().map(|r| row_weights(&pen, &r[..r.len() - 1])).collect();
        if last_weights.as_ref() == Some(&w) {
            break;
        }
        for i in 0..p {
            let (n, ok) = solve_nl_row(&gamma, i, &w[i], &mut rows[i], inner_tol, cap);
            sweeps += n;
            converged &= ok;
        }
        trace.push(nl_objective(&gamma, &to_t(&rows), &pen));
        last_weights = Some(w);
    }
    let t = to_t(&rows);
    let ttt = t.transpose_diag_self(&vec![1.0; p]);
    let omega = scale.inverse().sandwich(&ttt);
    Ok(CholeskyFit {
        target: Target::CholeskyNl,
        penalty: pen,
        t,
        d: None,
        omega,
        objective_trace: trace,
        half_step_trace: Vec::new(),
        converged,
        sweeps_used: sweeps,
    })
}
