//! Choice of `λ` over a grid by BIC.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimationResult, EstimatorConfig, Init};
use crate::matrix::{cholesky_factor, log_det_from_factor, SymMatrix};

/// Number of points in [`LambdaGrid::default_for`].
pub const DEFAULT_GRID_LEN: usize = 20;
/// Relative BIC difference below which two grid points count as tied.
pub const BIC_TIE_REL: f64 = 1e-9;

/// Strictly increasing, positive `λ` values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    /// Sorts the input; rejects empty, non-positive, non-finite or repeated
    /// values.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("lambda grid is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("lambda grid values must be positive and finite, got {v}")));
        }
        values.sort_by(f64::total_cmp);
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("lambda grid has repeated values"));
        }
        Ok(LambdaGrid { values })
    }

    /// `k` log-spaced values from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, k: usize) -> Result<Self> {
        if !(lo > 0.0 && hi.is_finite() && lo <= hi) || k == 0 {
            return Err(Error::invalid(format!("invalid grid {lo}:{hi}:{k}")));
        }
        if k == 1 || lo == hi {
            if k > 1 {
                return Err(Error::invalid("grid endpoints coincide but more than one point requested"));
            }
            return LambdaGrid::new(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (k - 1) as f64;
        let mut v: Vec<f64> = (0..k).map(|i| (a + step * i as f64).exp()).collect();
        v[0] = lo;
        v[k - 1] = hi;
        LambdaGrid::new(v)
    }

    /// `c·√(log p / n)` for 20 log-spaced `c ∈ [0.1, 10]`. For `p = 1` the
    /// unit uses `log 2`.
    pub fn default_for(p: usize, n: usize) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::invalid("default grid needs p ≥ 1 and n ≥ 1"));
        }
        let unit = ((p.max(2) as f64).ln() / n as f64).sqrt();
        LambdaGrid::log_spaced(0.1 * unit, 10.0 * unit, DEFAULT_GRID_LEN)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for LambdaGrid {
    type Err = Error;

    /// Parses `lo:hi:k`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid '{s}' must have the form lo:hi:k")));
        }
        let lo: f64 = parts[0].parse().map_err(|e| Error::invalid(format!("grid '{s}': {e}")))?;
        let hi: f64 = parts[1].parse().map_err(|e| Error::invalid(format!("grid '{s}': {e}")))?;
        let k: usize = parts[2].parse().map_err(|e| Error::invalid(format!("grid '{s}': {e}")))?;
        LambdaGrid::log_spaced(lo, hi, k)
    }
}

impl fmt::Display for LambdaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `p` plus the number of nonzero strictly-upper entries.
pub fn degrees_of_freedom(omega: &SymMatrix) -> usize {
    let p = omega.dim();
    p + (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .filter(|&(i, j)| omega.get(i, j) != 0.0)
        .count()
}

/// `n(tr(SΩ̂) − log|Ω̂|) + log(n)·df` with an explicit `df`.
pub fn bic_with_df(s: &SymMatrix, omega: &SymMatrix, n: usize, df: usize) -> Result<f64> {
    if s.dim() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: omega.dim() });
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let l = cholesky_factor(omega)?;
    let nf = n as f64;
    Ok(nf * (s.trace_product(omega) - log_det_from_factor(&l)) + nf.ln() * df as f64)
}

/// BIC with `df` counted from the nonzero pattern of `Ω̂`.
pub fn bic_score(s: &SymMatrix, omega: &SymMatrix, n: usize) -> Result<f64> {
    bic_with_df(s, omega, n, degrees_of_freedom(omega))
}

/// One row of the selection table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionRow {
    pub lambda: f64,
    pub bic: f64,
    pub support_size: usize,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub best_lambda: f64,
    pub best: EstimationResult,
    /// Sorted by increasing `λ`.
    pub table: Vec<SelectionRow>,
}

/// Fits `cfg` at every grid value from the largest `λ` down, warm-starting
/// each fit from the previous estimate, and returns the BIC minimizer.
/// Ties within [`BIC_TIE_REL`] go to the larger `λ`.
///
/// `df` is `p` plus the size of the reported support, so the Cholesky targets
/// are charged for the nonzero entries of `T`.
pub fn select_lambda(s: &SymMatrix, n: usize, grid: &LambdaGrid, template: &EstimatorConfig) -> Result<Selection> {
    let p = s.dim();
    let mut cfg = template.clone();
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64, EstimationResult)> = None;
    for &lambda in grid.values().iter().rev() {
        cfg.penalty = template.penalty.with_lambda(lambda)?;
        let fit = estimate(s, &cfg)?;
        let omega = fit.implied_precision()?;
        let bic = bic_with_df(s, &omega, n, p + fit.support.len())?;
        rows.push(SelectionRow {
            lambda,
            bic,
            support_size: fit.support.len(),
            objective: fit.final_objective(),
            converged: fit.converged,
        });
        if !fit.target.is_cholesky() {
            cfg.init = Init::Provided(fit.estimate.clone());
        }
        let better = match &best {
            None => true,
            Some((_, b, _)) => bic < b - BIC_TIE_REL * b.abs().max(1.0),
        };
        if better {
            best = Some((lambda, bic, fit));
        }
    }
    rows.reverse();
    let (best_lambda, _, best) = best.expect("grid is nonempty");
    Ok(Selection { best_lambda, best, table: rows })
}

/// Writes the table as CSV with header `lambda,bic,support_size,objective,converged`.
pub fn write_selection_csv<W: Write>(table: &[SelectionRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in table {
        w.serialize(row).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(())
}

pub fn save_selection_csv(table: &[SelectionRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_selection_csv(table, std::io::BufWriter::new(file))
}
