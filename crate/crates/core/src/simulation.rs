//! Synthetic truths, Gaussian sampling, error and support metrics, and a
//! seeded Monte Carlo runner for rate-of-convergence experiments.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorConfig, Target};
use crate::matrix::{cholesky_factor, frobenius_norm, operator_norm, sample_covariance, DataTable, DiagMatrix, SymMatrix};
use crate::tuning::{select_lambda, LambdaGrid};

/// Family of ground-truth matrices. The sparse side is always the precision
/// matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TruthKind {
    /// Unit diagonal and constant first off-diagonal.
    TridiagonalPrecision { offdiag: f64 },
    /// Each pair is an edge with probability `density`, weight `±magnitude`
    /// with random sign; diagonal `1 + Σ|offdiag|` in each row.
    SparseRandomPrecision { density: f64, magnitude: f64 },
    /// `σᵢⱼ = φ^|i−j|`, whose inverse is tridiagonal.
    Ar1Covariance { phi: f64 },
}

impl FromStr for TruthKind {
    type Err = Error;

    /// `identity`, `tridiag:a`, `sparse:density:magnitude` or `ar1:φ`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts[i].parse::<f64>().map_err(|e| Error::invalid(format!("truth '{s}': {e}")))
        };
        match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("identity", 1) => Ok(TruthKind::TridiagonalPrecision { offdiag: 0.0 }),
            ("tridiag", 2) => Ok(TruthKind::TridiagonalPrecision { offdiag: num(1)? }),
            ("sparse", 3) => Ok(TruthKind::SparseRandomPrecision { density: num(1)?, magnitude: num(2)? }),
            ("ar1", 2) => Ok(TruthKind::Ar1Covariance { phi: num(1)? }),
            _ => Err(Error::invalid(format!(
                "unrecognized truth '{s}' (expected identity, tridiag:a, sparse:density:magnitude or ar1:phi)"
            ))),
        }
    }
}

impl fmt::Display for TruthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TruthKind::TridiagonalPrecision { offdiag } => write!(f, "tridiag:{offdiag}"),
            TruthKind::SparseRandomPrecision { density, magnitude } => write!(f, "sparse:{density}:{magnitude}"),
            TruthKind::Ar1Covariance { phi } => write!(f, "ar1:{phi}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub kind: TruthKind,
    pub p: usize,
    pub seed: u64,
}

/// Off-diagonal pairs `(i, j)` with `i < j`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Support {
    p: usize,
    pairs: Vec<(usize, usize)>,
}

impl Support {
    pub fn new(p: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        for &(i, j) in &pairs {
            if i >= j || j >= p {
                return Err(Error::invalid(format!("support pair ({i}, {j}) is not strictly upper in dimension {p}")));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Support { p, pairs })
    }

    /// Exact nonzero strictly-upper pattern of `a`.
    pub fn of(a: &SymMatrix) -> Self {
        let p = a.dim();
        let pairs = (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .filter(|&(i, j)| a.get(i, j) != 0.0)
            .collect();
        Support { p, pairs }
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of unordered pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.pairs.binary_search(&key).is_ok()
    }
}

/// Generated ground truth.
#[derive(Clone, Debug)]
pub struct Truth {
    pub sigma: SymMatrix,
    pub omega: SymMatrix,
    /// Nonzero pattern of `omega`.
    pub support: Support,
    /// `λ_min(Σ₀)`.
    pub eig_min: f64,
    /// `λ_max(Σ₀)`.
    pub eig_max: f64,
}

impl Truth {
    /// Count of nonzero off-diagonal entries of `Ω₀`, both triangles.
    pub fn offdiag_nonzeros(&self) -> usize {
        2 * self.support.len()
    }

    /// `W₀ = diag(Σ₀)^{1/2}`.
    pub fn scale(&self) -> DiagMatrix {
        DiagMatrix::new(self.sigma.diagonal().iter().map(|v| v.sqrt()).collect()).expect("finite diagonal")
    }

    /// `Ψ₀ = W₀Ω₀W₀`.
    pub fn inverse_correlation(&self) -> SymMatrix {
        self.scale().sandwich(&self.omega)
    }
}

pub fn gen_truth(spec: &TruthSpec) -> Result<Truth> {
    let p = spec.p;
    if p == 0 {
        return Err(Error::invalid("truth dimension must be positive"));
    }
    let omega = match spec.kind {
        TruthKind::TridiagonalPrecision { offdiag } => {
            check_finite(offdiag, "offdiag")?;
            SymMatrix::from_fn(p, |i, j| match i.abs_diff(j) {
                0 => 1.0,
                1 => offdiag,
                _ => 0.0,
            })
        }
        TruthKind::SparseRandomPrecision { density, magnitude } => {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::invalid(format!("density must lie in [0, 1], got {density}")));
            }
            check_finite(magnitude, "magnitude")?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut m = vec![0.0; p * p];
            for i in 0..p {
                for j in (i + 1)..p {
                    let edge: f64 = rng.random();
                    let sign: bool = rng.random();
                    if edge < density {
                        let v = if sign { magnitude } else { -magnitude };
                        m[i * p + j] = v;
                        m[j * p + i] = v;
                    }
                }
            }
            for i in 0..p {
                let row: f64 = m[i * p..(i + 1) * p].iter().map(|v| v.abs()).sum();
                m[i * p + i] = 1.0 + row;
            }
            SymMatrix::new(p, m)?
        }
        TruthKind::Ar1Covariance { phi } => {
            check_finite(phi, "phi")?;
            if phi.abs() >= 1.0 {
                return Err(Error::NotPositiveDefinite { index: 1, pivot: 1.0 - phi * phi });
            }
            let c = 1.0 / (1.0 - phi * phi);
            SymMatrix::from_fn(p, |i, j| match i.abs_diff(j) {
                0 if p > 1 && (i == 0 || i == p - 1) => c,
                0 if p > 1 => (1.0 + phi * phi) * c,
                0 => 1.0,
                1 => -phi * c,
                _ => 0.0,
            })
        }
    };
    let sigma = match spec.kind {
        TruthKind::Ar1Covariance { phi } => SymMatrix::from_fn(p, |i, j| phi.powi(i.abs_diff(j) as i32)),
        _ => omega.inverse()?,
    };
    cholesky_factor(&sigma)?;
    let eig_max = operator_norm(&sigma)?;
    let eig_min = 1.0 / operator_norm(&omega)?;
    Ok(Truth { support: Support::of(&omega), sigma, omega, eig_min, eig_max })
}

fn check_finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite")))
    }
}

/// `n` i.i.d. rows `L·z` with `LLᵀ = Σ₀` and `z` standard normal.
pub fn sample_gaussian(sigma: &SymMatrix, n: usize, seed: u64) -> Result<DataTable> {
    let l = cholesky_factor(sigma)?;
    let p = sigma.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0; p];
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        for i in 0..p {
            let row = l.row_head(i);
            values.push(row.iter().zip(&z).map(|(a, b)| a * b).sum());
        }
    }
    DataTable::new(n, p, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportMetrics {
    /// Fraction of truth-zero pairs estimated as zero (1 if there are none).
    pub true_zero: f64,
    /// Fraction of truth-nonzero pairs estimated as nonzero (1 if there are
    /// none).
    pub true_nonzero: f64,
}

pub fn support_metrics(truth: &Support, estimate: &SymMatrix, support_tol: f64) -> Result<SupportMetrics> {
    let p = truth.dim();
    if estimate.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: estimate.dim() });
    }
    let (mut zero_hit, mut zero_total, mut nz_hit, mut nz_total) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..p {
        for j in (i + 1)..p {
            let found = estimate.get(i, j).abs() > support_tol;
            if truth.contains(i, j) {
                nz_total += 1;
                nz_hit += found as usize;
            } else {
                zero_total += 1;
                zero_hit += !found as usize;
            }
        }
    }
    let rate = |hit: usize, total: usize| if total == 0 { 1.0 } else { hit as f64 / total as f64 };
    Ok(SupportMetrics { true_zero: rate(zero_hit, zero_total), true_nonzero: rate(nz_hit, nz_total) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub frobenius_sq: f64,
    pub operator_sq: f64,
}

/// Squared Frobenius and operator norms of `estimate − truth`.
pub fn error_metrics(truth: &SymMatrix, estimate: &SymMatrix) -> Result<ErrorMetrics> {
    let diff = estimate.sub(truth)?;
    let fro = frobenius_norm(&diff);
    let op = operator_norm(&diff)?;
    Ok(ErrorMetrics { frobenius_sq: fro * fro, operator_sq: op * op })
}

/// What a replicate estimates.
#[derive(Clone, Debug)]
pub enum Method {
    /// Runs the configured estimator.
    Estimator(EstimatorConfig),
    /// Returns the truth itself; plumbing check.
    Truth,
}

/// How `λ` is chosen per replicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LambdaRule {
    /// The `λ` already in the estimator config.
    Fixed,
    /// `c·√(log p / n)`.
    OracleScale { c: f64 },
    /// BIC over [`LambdaGrid::default_for`].
    Bic,
}

/// Scale on which errors are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorScale {
    /// Implied precision `Ω̂` against `Ω₀`.
    Precision,
    /// Inverse-correlation scale: `Ψ̂` against `Ψ₀` for the
    /// inverse-correlation target, otherwise `W₀Ω̂W₀` against `Ψ₀`.
    InverseCorrelation,
}

#[derive(Clone, Debug)]
pub struct RateExperiment {
    pub truth: TruthKind,
    pub n_values: Vec<usize>,
    pub p_values: Vec<usize>,
    pub replicates: usize,
    pub method: Method,
    pub lambda_rule: LambdaRule,
    pub scale: ErrorScale,
    /// Entries with magnitude at most this count as zero.
    pub support_tol: f64,
    pub seed: u64,
}

impl RateExperiment {
    pub fn new(truth: TruthKind, method: Method) -> Self {
        RateExperiment {
            truth,
            n_values: vec![100],
            p_values: vec![10],
            replicates: 10,
            method,
            lambda_rule: LambdaRule::Fixed,
            scale: ErrorScale::Precision,
            support_tol: 1e-8,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.n_values.is_empty() || self.p_values.is_empty() {
            return Err(Error::invalid("experiment needs at least one n and one p"));
        }
        if self.n_values.iter().any(|&n| n < 2) || self.p_values.contains(&0) {
            return Err(Error::invalid("every n must be at least 2 and every p at least 1"));
        }
        if !(self.support_tol >= 0.0) {
            return Err(Error::invalid("support tolerance must be non-negative"));
        }
        if let LambdaRule::OracleScale { c } = self.lambda_rule {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("lambda scale must be finite and non-negative, got {c}")));
            }
        }
        if let Method::Estimator(cfg) = &self.method {
            cfg.validate()?;
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one replicate, a hash of the experiment seed and its coordinates.
pub fn replicate_seed(seed: u64, n: usize, p: usize, rep: usize) -> u64 {
    let mut h = splitmix64(seed);
    for v in [n as u64, p as u64, rep as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

/// Seed of the truth for dimension `p`; shared by every `n`.
pub fn truth_seed(seed: u64, p: usize) -> u64 {
    splitmix64(splitmix64(seed ^ 0x7275_7468) ^ p as u64)
}

/// Result of one replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub lambda: f64,
    pub errors: ErrorMetrics,
    pub support: SupportMetrics,
    pub converged: bool,
}

/// Runs one replicate: sample, choose `λ`, estimate, measure.
pub fn run_replicate(exp: &RateExperiment, truth: &Truth, n: usize, seed: u64) -> Result<ReplicateOutcome> {
    let p = truth.omega.dim();
    let reference = match exp.scale {
        ErrorScale::Precision => truth.omega.clone(),
        ErrorScale::InverseCorrelation => truth.inverse_correlation(),
    };
    let cfg = match &exp.method {
        Method::Truth => {
            return Ok(ReplicateOutcome {
                lambda: 0.0,
                errors: error_metrics(&reference, &reference)?,
                support: support_metrics(&truth.support, &truth.omega, exp.support_tol)?,
                converged: true,
            })
        }
        Method::Estimator(cfg) => cfg,
    };
    let data = sample_gaussian(&truth.sigma, n, seed)?;
    let s = sample_covariance(&data, false)?;
    let fit = match exp.lambda_rule {
        LambdaRule::Fixed => estimate(&s, cfg)?,
        LambdaRule::OracleScale { c } => {
            let mut cfg = cfg.clone();
            cfg.penalty = cfg.penalty.with_lambda(c * oracle_unit(p, n))?;
            estimate(&s, &cfg)?
        }
        LambdaRule::Bic => select_lambda(&s, n, &LambdaGrid::default_for(p, n)?, cfg)?.best,
    };
    let omega_hat = fit.implied_precision()?;
    let compared = match (exp.scale, fit.target) {
        (ErrorScale::Precision, _) => omega_hat.clone(),
        (ErrorScale::InverseCorrelation, Target::InverseCorrelation) => fit.estimate.clone(),
        (ErrorScale::InverseCorrelation, _) => truth.scale().sandwich(&omega_hat),
    };
    let support_source = match fit.target {
        Target::Precision | Target::InverseCorrelation => &fit.estimate,
        _ => &omega_hat,
    };
    Ok(ReplicateOutcome {
        lambda: fit.penalty.lambda(),
        errors: error_metrics(&reference, &compared)?,
        support: support_metrics(&truth.support, support_source, exp.support_tol)?,
        converged: fit.converged,
    })
}

/// `√(log p / n)`, with `log 2` standing in when `p = 1`.
pub fn oracle_unit(p: usize, n: usize) -> f64 {
    ((p.max(2) as f64).ln() / n as f64).sqrt()
}

/// Aggregate over the replicates of one `(n, p)` cell. Means and standard
/// deviations use converged replicates only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub p: usize,
    /// Nonzero off-diagonal entries of `Ω₀`, both triangles.
    pub s: usize,
    pub replicates_ok: usize,
    pub failures: usize,
    pub mean_frobenius_sq: f64,
    pub sd_frobenius_sq: f64,
    pub mean_operator_sq: f64,
    pub sd_operator_sq: f64,
    pub true_zero_rate: f64,
    pub true_nonzero_rate: f64,
    pub mean_lambda: f64,
}

impl RateRow {
    /// `(p + s)·log p / n`.
    pub fn rate_variable(&self) -> f64 {
        (self.p + self.s) as f64 * (self.p.max(2) as f64).ln() / self.n as f64
    }
}

/// Least-squares slope with its standard error (absent with fewer than two
/// distinct abscissae; the error needs at least three points).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: Option<f64>,
    pub std_error: Option<f64>,
}

pub fn fit_slope(x: &[f64], y: &[f64]) -> SlopeFit {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return SlopeFit { slope: None, std_error: None };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return SlopeFit { slope: None, std_error: None };
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let std_error = (pts.len() > 2).then(|| {
        let ssr: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    });
    SlopeFit { slope: Some(slope), std_error }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub truth: TruthKind,
    pub lambda_rule: LambdaRule,
    pub scale: ErrorScale,
    pub replicates: usize,
    pub seed: u64,
    pub rows: Vec<RateRow>,
    /// `log mean‖·‖²_F` against `log((p + s)·log p / n)`.
    pub slope_vs_rate: SlopeFit,
    /// `log mean‖·‖²_F` against `log n`.
    pub slope_vs_n: SlopeFit,
    /// Messages of replicates that returned an error, prefixed by cell.
    pub failure_messages: Vec<String>,
}

/// Runs every `(n, p)` cell on the current rayon pool.
pub fn run_rate_experiment(exp: &RateExperiment) -> Result<RateReport> {
    exp.validate()?;
    let truths: Vec<(usize, Truth)> = exp
        .p_values
        .iter()
        .map(|&p| Ok((p, gen_truth(&TruthSpec { kind: exp.truth, p, seed: truth_seed(exp.seed, p) })?)))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (ti, (p, _)) in truths.iter().enumerate() {
        for &n in &exp.n_values {
            for rep in 0..exp.replicates {
                jobs.push((ti, n, rep, replicate_seed(exp.seed, n, *p, rep)));
            }
        }
    }
    let outcomes: Vec<Result<ReplicateOutcome>> = jobs
        .par_iter()
        .map(|&(ti, n, _, seed)| run_replicate(exp, &truths[ti].1, n, seed))
        .collect();

    let mut rows = Vec::new();
    let mut messages = Vec::new();
    let mut idx = 0;
    for (p, truth) in &truths {
        for &n in &exp.n_values {
            let cell = &outcomes[idx..idx + exp.replicates];
            idx += exp.replicates;
            let mut ok = Vec::new();
            let mut failures = 0;
            for o in cell {
                match o {
                    Ok(r) if r.converged => ok.push(r),
                    Ok(_) => failures += 1,
                    Err(e) => {
                        failures += 1;
                        messages.push(format!("n={n} p={p}: {e}"));
                    }
                }
            }
            let (mf, sf) = mean_sd(ok.iter().map(|r| r.errors.frobenius_sq));
            let (mo, so) = mean_sd(ok.iter().map(|r| r.errors.operator_sq));
            rows.push(RateRow {
                n,
                p: *p,
                s: truth.offdiag_nonzeros(),
                replicates_ok: ok.len(),
                failures,
                mean_frobenius_sq: mf,
                sd_frobenius_sq: sf,
                mean_operator_sq: mo,
                sd_operator_sq: so,
                true_zero_rate: mean_sd(ok.iter().map(|r| r.support.true_zero)).0,
                true_nonzero_rate: mean_sd(ok.iter().map(|r| r.support.true_nonzero)).0,
                mean_lambda: mean_sd(ok.iter().map(|r| r.lambda)).0,
            });
        }
    }
    let log_err: Vec<f64> = rows.iter().map(|r| r.mean_frobenius_sq.ln()).collect();
    let log_rate: Vec<f64> = rows.iter().map(|r| r.rate_variable().ln()).collect();
    let log_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    Ok(RateReport {
        truth: exp.truth,
        lambda_rule: exp.lambda_rule,
        scale: exp.scale,
        replicates: exp.replicates,
        seed: exp.seed,
        slope_vs_rate: fit_slope(&log_rate, &log_err),
        slope_vs_n: fit_slope(&log_n, &log_err),
        rows,
        failure_messages: messages,
    })
}

/// Runs on a dedicated pool of `workers` threads. Output does not depend on
/// `workers`.
pub fn run_rate_experiment_with_workers(exp: &RateExperiment, workers: usize) -> Result<RateReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_rate_experiment(exp))
}

/// Mean and sample standard deviation; NaN when empty, sd 0 for one value.
fn mean_sd(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() == 1 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var.sqrt())
}

impl RateReport {
    /// One row per cell; header
    /// `n,p,s,replicates_ok,failures,mean_frobenius_sq,sd_frobenius_sq,mean_operator_sq,sd_operator_sq,true_zero_rate,true_nonzero_rate,mean_lambda`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::invalid(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(format!("json: {e}")))
    }
}
