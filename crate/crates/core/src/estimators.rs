//! Matrix-level penalized-likelihood estimators wrapped in the local linear
//! approximation (LLA) loop.
//!
//! Each LLA step replaces the penalty by its tangent at the current iterate,
//! which turns the problem into a weighted-L1 one solved by
//! [`crate::solvers`]. The weights start from the zero off-diagonal point, so
//! the first iterate is the plain L1 solution. The inner solver is always
//! warm-started from the previous iterate and never increases its objective;
//! together with the concavity of every penalty on `[0, ∞)` this makes the
//! true-penalty objective trace nonincreasing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cholesky::{self, CholeskyFit};
use crate::error::{Error, Result};
use crate::matrix::{cholesky_factor, log_det_from_factor, to_correlation, DiagMatrix, LowerTriangular, SymMatrix};
use crate::penalty::Penalty;
use crate::solvers::{glasso_guarded, prox_covariance_guarded, SingularGuard, SolverOptions, WeightMatrix};

/// Relative threshold below which an entry counts as a numerical zero.
pub const SUPPORT_TOL_REL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Precision,
    Covariance,
    InverseCorrelation,
    Correlation,
    CholeskyMl,
    CholeskyLs,
    CholeskyNl,
}

impl Target {
    pub const ALL: [Target; 7] = [
        Target::Precision,
        Target::Covariance,
        Target::InverseCorrelation,
        Target::Correlation,
        Target::CholeskyMl,
        Target::CholeskyLs,
        Target::CholeskyNl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Precision => "precision",
            Target::Covariance => "covariance",
            Target::InverseCorrelation => "inverse-correlation",
            Target::Correlation => "correlation",
            Target::CholeskyMl => "cholesky-ml",
            Target::CholeskyLs => "cholesky-ls",
            Target::CholeskyNl => "cholesky-nl",
        }
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self, Target::CholeskyMl | Target::CholeskyLs | Target::CholeskyNl)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown target '{s}'")))
    }
}

/// Starting point handed to the inner solver.
#[derive(Clone, Debug, Default)]
pub enum Init {
    #[default]
    Default,
    Provided(SymMatrix),
}

#[derive(Clone, Debug)]
pub struct EstimatorConfig {
    pub target: Target,
    pub penalty: Penalty,
    pub lla_iters: usize,
    pub solver: SolverOptions,
    pub init: Init,
}

impl EstimatorConfig {
    pub fn new(target: Target, penalty: Penalty) -> Self {
        EstimatorConfig {
            target,
            penalty,
            lla_iters: 3,
            solver: SolverOptions::default(),
            init: Init::Default,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lla_iters < 1 {
            return Err(Error::invalid("lla_iters must be at least 1"));
        }
        self.solver.validate()
    }
}

/// Cholesky-factor parts of a fit.
#[derive(Clone, Debug)]
pub struct CholeskyParts {
    pub t: LowerTriangular,
    pub d: Option<DiagMatrix>,
}

#[derive(Clone, Debug)]
pub struct EstimationResult {
    pub target: Target,
    pub penalty: Penalty,
    /// Estimate on the target's own scale (precision for the Cholesky
    /// targets).
    pub estimate: SymMatrix,
    /// Rescaled companion: `Ŵ⁻¹Ψ̂Ŵ⁻¹` for inverse-correlation, `ŴΓ̂Ŵ` for
    /// correlation.
    pub companion: Option<SymMatrix>,
    pub cholesky: Option<CholeskyParts>,
    /// Off-diagonal nonzero pairs `(i, j)`. For the Cholesky targets these are
    /// strictly-lower entries of `T` reported as `(j, i)` with `j < i`;
    /// otherwise upper-triangle pairs of the estimate.
    pub support: Vec<(usize, usize)>,
    /// True-penalty objective after each LLA iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
}

impl EstimationResult {
    /// The estimate expressed as a precision matrix on the scale of `S`,
    /// used for likelihood evaluation.
    pub fn implied_precision(&self) -> Result<SymMatrix> {
        match self.target {
            Target::Precision | Target::CholeskyMl | Target::CholeskyLs | Target::CholeskyNl => {
                Ok(self.estimate.clone())
            }
            Target::Covariance => self.estimate.inverse(),
            Target::InverseCorrelation => Ok(self.companion.clone().expect("companion present")),
            Target::Correlation => self.companion.as_ref().expect("companion present").inverse(),
        }
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Serialized form of an [`EstimationResult`].
#[derive(Clone, Debug, Serialize)]
pub struct EstimateRecord {
    pub target: Target,
    pub p: usize,
    pub lambda: f64,
    pub penalty: String,
    /// Rows of the estimate.
    pub estimate: Vec<Vec<f64>>,
    pub support_offdiag: Vec<[usize; 2]>,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
}

fn rows_of(dim: usize, get: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..dim).map(|i| (0..dim).map(|j| get(i, j)).collect()).collect()
}

impl EstimationResult {
    pub fn to_record(&self) -> EstimateRecord {
        let p = self.estimate.dim();
        EstimateRecord {
            target: self.target,
            p,
            lambda: self.penalty.lambda(),
            penalty: self.penalty.to_string(),
            estimate: rows_of(p, |i, j| self.estimate.get(i, j)),
            support_offdiag: self.support.iter().map(|&(i, j)| [i, j]).collect(),
            objective_trace: self.objective_trace.clone(),
            converged: self.converged,
            companion: self.companion.as_ref().map(|c| rows_of(p, |i, j| c.get(i, j))),
            t: self.cholesky.as_ref().map(|c| rows_of(p, |i, j| c.t.get(i, j))),
            d: self.cholesky.as_ref().and_then(|c| c.d.as_ref().map(|d| d.values().to_vec())),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_record()).map_err(|e| Error::invalid(format!("json: {e}")))
    }
}

/// Pairs `i < j` with `|aᵢⱼ| > 1e-8 · max|A|`.
pub fn support_of(a: &SymMatrix) -> Vec<(usize, usize)> {
    let tol = SUPPORT_TOL_REL * a.max_abs();
    let p = a.dim();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if a.get(i, j).abs() > tol {
                out.push((i, j));
            }
        }
    }
    out
}

/// Sum of `p_λ(|aᵢⱼ|)` over `i ≠ j`.
pub fn offdiag_penalty(pen: &Penalty, a: &SymMatrix) -> f64 {
    let p = a.dim();
    let mut acc = 0.0;
    for i in 0..p {
        for j in i + 1..p {
            acc += pen.value(a.get(i, j));
        }
    }
    2.0 * acc
}

/// `tr(SΩ) − log|Ω| + Σ_{i≠j} p_λ(|ωᵢⱼ|)`; `+∞` off the positive-definite
/// cone.
pub fn precision_objective(s: &SymMatrix, omega: &SymMatrix, pen: &Penalty) -> f64 {
    match cholesky_factor(omega) {
        Ok(l) => s.trace_product(omega) - log_det_from_factor(&l) + offdiag_penalty(pen, omega),
        Err(_) => f64::INFINITY,
    }
}

/// `tr(SΣ⁻¹) + log|Σ| + Σ_{i≠j} p_λ(|σᵢⱼ|)`; `+∞` off the positive-definite
/// cone.
pub fn covariance_objective(s: &SymMatrix, sigma: &SymMatrix, pen: &Penalty) -> f64 {
    match cholesky_factor(sigma) {
        Ok(l) => match l.inverse_product() {
            Ok(inv) => s.trace_product(&inv) + log_det_from_factor(&l) + offdiag_penalty(pen, sigma),
            Err(_) => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    }
}

/// LLA weights `p'_λ(|cᵢⱼ|)` off the diagonal, zero on it.
pub fn lla_weights(pen: &Penalty, current: &SymMatrix) -> WeightMatrix {
    WeightMatrix::from_fn(current.dim(), |i, j| pen.derivative(current.get(i, j).abs()))
        .expect("penalty derivatives are finite and non-negative")
}

fn is_singular(s: &SymMatrix) -> bool {
    s.dim() > 1 && cholesky_factor(s).is_err()
}

/// Fails when `S` is singular and the penalty leaves the off-diagonal free.
pub(crate) fn check_singular_needs_penalty(s: &SymMatrix, pen: &Penalty) -> Result<()> {
    if pen.slope_at_origin() <= 0.0 && is_singular(s) {
        Err(Error::SingularUnpenalized)
    } else {
        Ok(())
    }
}

fn check_init(init: &SymMatrix, p: usize) -> Result<()> {
    if init.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: init.dim(),
        });
    }
    cholesky_factor(init).map(|_| ())
}

/// Which weighted solver an LLA run drives.
#[derive(Clone, Copy)]
enum Inner {
    Glasso,
    Prox { pin_diagonal: bool },
}

struct LlaOutcome {
    estimate: SymMatrix,
    trace: Vec<f64>,
    converged: bool,
    sweeps: usize,
}

fn run_lla(s: &SymMatrix, cfg: &EstimatorConfig, start: SymMatrix, inner: Inner) -> Result<LlaOutcome> {
    let pen = &cfg.penalty;
    let objective = |m: &SymMatrix| match inner {
        Inner::Glasso => precision_objective(s, m, pen),
        Inner::Prox { .. } => covariance_objective(s, m, pen),
    };
    let mut weights_at = start.diag_part();
    let mut current = start;
    let mut trace = Vec::with_capacity(cfg.lla_iters);
    let mut converged = true;
    let mut sweeps = 0;
    let mut last_weights: Option<WeightMatrix> = None;
    for k in 0..cfg.lla_iters {
        let w = lla_weights(pen, &weights_at);
        if last_weights.as_ref() == Some(&w) {
            break;
        }
        // the first step is a plain L1 problem; later steps may leave large
        // entries unpenalized
        let guard = if k == 0 {
            SingularGuard::AllPenalized
        } else {
            SingularGuard::AnyPenalized
        };
        let solved = match inner {
            Inner::Glasso => glasso_guarded(s, &w, &current, &cfg.solver, guard)?,
            Inner::Prox { pin_diagonal } => {
                prox_covariance_guarded(s, &w, &current, &cfg.solver, guard, pin_diagonal)?
            }
        };
        converged &= solved.converged;
        sweeps += solved.sweeps;
        current = solved.value;
        trace.push(objective(&current));
        weights_at = current.clone();
        last_weights = Some(w);
    }
    Ok(LlaOutcome {
        estimate: current,
        trace,
        converged,
        sweeps,
    })
}

fn finish(target: Target, cfg: &EstimatorConfig, out: LlaOutcome, companion: Option<SymMatrix>) -> EstimationResult {
    EstimationResult {
        target,
        penalty: cfg.penalty,
        support: support_of(&out.estimate),
        estimate: out.estimate,
        companion,
        cholesky: None,
        objective_trace: out.trace,
        converged: out.converged,
        sweeps_used: out.sweeps,
    }
}

/// Sparse precision matrix: minimizes `tr(SΩ) − log|Ω| + Σ_{i≠j} p_λ(|ωᵢⱼ|)`.
pub fn estimate_precision(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    check_singular_needs_penalty(s, &cfg.penalty)?;
    let start = match &cfg.init {
        Init::Default => default_precision_start(s)?,
        Init::Provided(m) => {
            check_init(m, s.dim())?;
            m.clone()
        }
    };
    let out = run_lla(s, cfg, start, Inner::Glasso)?;
    Ok(finish(Target::Precision, cfg, out, None))
}

fn default_precision_start(s: &SymMatrix) -> Result<SymMatrix> {
    let diag = s.diagonal();
    if let Some(i) = diag.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateColumn { column: i });
    }
    Ok(SymMatrix::from_diag(&diag.iter().map(|v| 1.0 / v).collect::<Vec<_>>()))
}

/// Sparse covariance matrix: minimizes `tr(SΣ⁻¹) + log|Σ| + Σ_{i≠j} p_λ(|σᵢⱼ|)`.
pub fn estimate_covariance(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    if let Some(i) = (0..s.dim()).find(|&i| !(s.get(i, i) > 0.0)) {
        return Err(Error::DegenerateColumn { column: i });
    }
    check_singular_needs_penalty(s, &cfg.penalty)?;
    let start = match &cfg.init {
        Init::Default => s.diag_part(),
        Init::Provided(m) => {
            check_init(m, s.dim())?;
            m.clone()
        }
    };
    let out = run_lla(s, cfg, start, Inner::Prox { pin_diagonal: false })?;
    Ok(finish(Target::Covariance, cfg, out, None))
}

/// Sparse inverse correlation `Ψ` from the sample correlation, with companion
/// precision `Ŵ⁻¹Ψ̂Ŵ⁻¹`.
pub fn estimate_inverse_correlation(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    let (gamma, scale) = to_correlation(s)?;
    check_singular_needs_penalty(&gamma, &cfg.penalty)?;
    let start = match &cfg.init {
        Init::Default => SymMatrix::identity(s.dim()),
        Init::Provided(m) => {
            check_init(m, s.dim())?;
            m.clone()
        }
    };
    let out = run_lla(&gamma, cfg, start, Inner::Glasso)?;
    let companion = scale.inverse().sandwich(&out.estimate);
    Ok(finish(Target::InverseCorrelation, cfg, out, Some(companion)))
}

/// Sparse correlation `Γ` with unit diagonal, with companion covariance
/// `ŴΓ̂Ŵ`.
pub fn estimate_correlation(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    cfg.validate()?;
    let (gamma, scale) = to_correlation(s)?;
    check_singular_needs_penalty(&gamma, &cfg.penalty)?;
    let start = match &cfg.init {
        Init::Default => SymMatrix::identity(s.dim()),
        Init::Provided(m) => {
            check_init(m, s.dim())?;
            // the diagonal is not a free parameter
            let unit = SymMatrix::from_fn(m.dim(), |i, j| if i == j { 1.0 } else { m.get(i, j) });
            check_init(&unit, s.dim())?;
            unit
        }
    };
    let out = run_lla(&gamma, cfg, start, Inner::Prox { pin_diagonal: true })?;
    let companion = scale.sandwich(&out.estimate);
    Ok(finish(Target::Correlation, cfg, out, Some(companion)))
}

/// Dispatches on `cfg.target`.
pub fn estimate(s: &SymMatrix, cfg: &EstimatorConfig) -> Result<EstimationResult> {
    match cfg.target {
        Target::Precision => estimate_precision(s, cfg),
        Target::Covariance => estimate_covariance(s, cfg),
        Target::InverseCorrelation => estimate_inverse_correlation(s, cfg),
        Target::Correlation => estimate_correlation(s, cfg),
        Target::CholeskyMl => cholesky::estimate_cholesky_ml(s, cfg).map(CholeskyFit::into_result),
        Target::CholeskyLs => cholesky::estimate_cholesky_ls(s, cfg).map(CholeskyFit::into_result),
        Target::CholeskyNl => cholesky::estimate_cholesky_nl(s, cfg).map(CholeskyFit::into_result),
    }
}
