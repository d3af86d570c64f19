//! Dense matrix types and the handful of factorizations the estimators need.
//!
//! Everything is stored row-major in a flat `Vec<f64>`. [`SymMatrix`] is the
//! carrier for covariance-like quantities and is exactly symmetric by
//! construction; [`LowerTriangular`] holds Cholesky and modified-Cholesky
//! factors; [`DiagMatrix`] holds scale matrices.

use std::fmt;

use log::warn;

use crate::error::{Error, Result};

/// Relative pivot floor below which a Cholesky factorization declares the
/// input not positive definite.
pub const PD_FLOOR_REL: f64 = 1e-12;
/// Relative convergence tolerance of the power iterations.
pub const OP_NORM_TOL: f64 = 1e-10;
const ASYMMETRY_WARN_REL: f64 = 1e-8;

/// Row-major view shared by all dense matrix types.
pub trait Dense {
    fn shape(&self) -> (usize, usize);
    fn entries(&self) -> &[f64];

    fn at(&self, i: usize, j: usize) -> f64 {
        self.entries()[i * self.shape().1 + j]
    }

    fn to_matrix(&self) -> Matrix {
        let (rows, cols) = self.shape();
        Matrix {
            rows,
            cols,
            data: self.entries().to_vec(),
        }
    }
}

/// General dense real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `AᵀA`, symmetric by construction.
    pub fn gram(&self) -> SymMatrix {
        let n = self.cols;
        let mut data = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                for j in i..n {
                    data[i * n + j] += a * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        SymMatrix::from_raw(n, data)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    fn mul_transpose_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }
}

impl Dense for Matrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn entries(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, "Matrix", self.rows, self.cols, &self.data)
    }
}

fn write_rows(f: &mut fmt::Formatter<'_>, name: &str, rows: usize, cols: usize, data: &[f64]) -> fmt::Result {
    writeln!(f, "{name} {rows}x{cols} [")?;
    for i in 0..rows {
        writeln!(f, "  {:?}", &data[i * cols..(i + 1) * cols])?;
    }
    write!(f, "]")
}

/// Dense symmetric `p × p` matrix.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from row-major entries. Mildly asymmetric
    /// input is replaced by `(A + Aᵀ)/2`; a warning is logged when the
    /// asymmetry exceeds `1e-8` relative to the largest entry.
    pub fn new(dim: usize, mut data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0_f64;
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                asym = asym.max((a - b).abs());
                let avg = 0.5 * (a + b);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        if asym > ASYMMETRY_WARN_REL * scale {
            warn!("symmetrizing input with relative asymmetry {:e}", asym / scale);
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        Self::new(m.rows(), m.data().to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(&Matrix::from_rows(rows)?)
    }

    /// Fills the upper triangle from `f(i, j)` with `i <= j` and mirrors it.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data }
    }

    /// Caller guarantees exact symmetry.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        SymMatrix { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| 0.0)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Matrix with the same diagonal and zero off-diagonal part.
    pub fn diag_part(&self) -> SymMatrix {
        SymMatrix::from_diag(&self.diagonal())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(A·B)` for symmetric `A`, `B`.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        dot(&self.data, &other.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_offdiag(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    m = m.max(self.get(i, j).abs());
                }
            }
        }
        m
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix::from_raw(self.dim, self.data.iter().map(|v| c * v).collect())
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(SymMatrix::from_raw(self.dim, data))
    }

    pub fn matmul(&self, other: &SymMatrix) -> Matrix {
        self.to_matrix()
            .matmul(&other.to_matrix())
            .expect("square matrices of equal size")
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    /// Inverse via the Cholesky factor.
    pub fn inverse(&self) -> Result<SymMatrix> {
        cholesky_factor(self)?.inverse_product()
    }

    /// `P·A·Pᵀ` where `perm[k]` is the old index placed at position `k`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        assert_eq!(perm.len(), self.dim);
        SymMatrix::from_fn(self.dim, |i, j| self.get(perm[i], perm[j]))
    }

    /// Principal submatrix on the leading `k` indices.
    pub fn leading(&self, k: usize) -> SymMatrix {
        SymMatrix::from_fn(k, |i, j| self.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Dense for SymMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.dim, self.dim)
    }
    fn entries(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, "SymMatrix", self.dim, self.dim, &self.data)
    }
}

/// Lower-triangular matrix; entries above the diagonal are exactly zero.
#[derive(Clone, PartialEq)]
pub struct LowerTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if data[i * dim + j] != 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) above the diagonal is nonzero"
                    )));
                }
            }
        }
        Ok(LowerTriangular { dim, data })
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        LowerTriangular { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        LowerTriangular { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row `i` up to and including the diagonal.
    pub fn row_head(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..i * self.dim + i + 1]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `L·Lᵀ`.
    pub fn times_transpose(&self) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.row_head(i)[..k], &self.row_head(j)[..k])
        })
    }

    /// `Lᵀ·M·L` for diagonal `M` given by `mid`.
    pub fn transpose_diag_self(&self, mid: &[f64]) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            let start = i.max(j);
            (start..p).map(|k| self.get(k, i) * mid[k] * self.get(k, j)).sum()
        })
    }

    /// Solves `L·x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut x = b.to_vec();
        for i in 0..p {
            let row = &self.data[i * p..i * p + i];
            let s = x[i] - dot(row, &x[..i]);
            x[i] = s / self.data[i * p + i];
        }
        x
    }

    /// Solves `Lᵀ·x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut x = b.to_vec();
        for i in (0..p).rev() {
            let xi = x[i] / self.data[i * p + i];
            x[i] = xi;
            for k in 0..i {
                x[k] -= self.data[i * p + k] * xi;
            }
        }
        x
    }

    /// `(L·Lᵀ)⁻¹`, i.e. the inverse of the matrix this is a Cholesky factor of.
    pub fn inverse_product(&self) -> Result<SymMatrix> {
        let p = self.dim;
        let linv = self.inverse();
        // (L Lᵀ)⁻¹ = L⁻ᵀ L⁻¹
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let mut s = 0.0;
                for k in j..p {
                    s += linv.data[k * p + i] * linv.data[k * p + j];
                }
                data[i * p + j] = s;
                data[j * p + i] = s;
            }
        }
        Ok(SymMatrix::from_raw(p, data))
    }

    /// Inverse, itself lower triangular.
    pub fn inverse(&self) -> LowerTriangular {
        let p = self.dim;
        let mut inv = vec![0.0; p * p];
        for col in 0..p {
            inv[col * p + col] = 1.0 / self.data[col * p + col];
            for i in col + 1..p {
                let mut s = 0.0;
                for k in col..i {
                    s += self.data[i * p + k] * inv[k * p + col];
                }
                inv[i * p + col] = -s / self.data[i * p + i];
            }
        }
        LowerTriangular { dim: p, data: inv }
    }
}

impl Dense for LowerTriangular {
    fn shape(&self) -> (usize, usize) {
        (self.dim, self.dim)
    }
    fn entries(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Debug for LowerTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rows(f, "LowerTriangular", self.dim, self.dim, &self.data)
    }
}

/// Diagonal matrix stored as its diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagMatrix(Vec<f64>);

impl DiagMatrix {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("diagonal has non-finite values"));
        }
        Ok(DiagMatrix(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn inverse(&self) -> DiagMatrix {
        DiagMatrix(self.0.iter().map(|v| 1.0 / v).collect())
    }

    /// `D·A·D`.
    pub fn sandwich(&self, a: &SymMatrix) -> SymMatrix {
        let d = &self.0;
        SymMatrix::from_fn(a.dim(), |i, j| d[i] * a.get(i, j) * d[j])
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factor `L` with `L·Lᵀ = A`.
///
/// A pivot at or below `1e-12 · max diag(A)` is reported as
/// [`Error::NotPositiveDefinite`].
pub fn cholesky_factor(a: &SymMatrix) -> Result<LowerTriangular> {
    let p = a.dim();
    let max_diag = (0..p).map(|i| a.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: a.get(0, 0),
        });
    }
    let floor = PD_FLOOR_REL * max_diag;
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let row_j = &l[j * p..j * p + j];
        let pivot = a.get(j, j) - dot(row_j, row_j);
        if !(pivot > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let s = a.get(i, j) - dot(&l[i * p..i * p + j], &l[j * p..j * p + j]);
            l[i * p + j] = s / d;
        }
    }
    Ok(LowerTriangular::from_raw(p, l))
}

/// Natural log-determinant of a positive-definite matrix.
pub fn log_det(a: &SymMatrix) -> Result<f64> {
    let l = cholesky_factor(a)?;
    Ok(log_det_from_factor(&l))
}

pub(crate) fn log_det_from_factor(l: &LowerTriangular) -> f64 {
    2.0 * (0..l.dim()).map(|i| l.get(i, i).ln()).sum::<f64>()
}

pub fn is_positive_definite(a: &SymMatrix) -> bool {
    cholesky_factor(a).is_ok()
}

pub fn frobenius_norm<M: Dense + ?Sized>(a: &M) -> f64 {
    a.entries().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Deterministic starting vector with no special alignment to coordinate
/// axes.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).fract()).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Iteration cap for the power iterations.
fn power_iteration_cap(n: usize) -> usize {
    (10 * n).max(10_000)
}

/// Largest singular value, by power iteration on `AᵀA`.
pub fn operator_norm<M: Dense + ?Sized>(a: &M) -> Result<f64> {
    let m = a.to_matrix();
    if m.data().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut v = start_vector(m.cols());
    normalize(&mut v);
    let mut estimate = 0.0_f64;
    for _ in 0..power_iteration_cap(m.cols()) {
        let av = m.mul_vec(&v);
        let mut w = m.mul_transpose_vec(&av);
        // Rayleigh quotient vᵀAᵀAv with |v| = 1
        let next = dot(&av, &av);
        let norm = normalize(&mut w);
        if norm == 0.0 {
            // start vector in the null space; restart from another direction
            v = (0..m.cols()).map(|i| if i % 2 == 0 { 1.0 } else { -0.7 }).collect();
            normalize(&mut v);
            continue;
        }
        if (next - estimate).abs() <= OP_NORM_TOL * next {
            return Ok(next.max(norm).sqrt());
        }
        estimate = next;
        v = w;
    }
    Err(Error::NonConvergence {
        what: "operator norm power iteration",
        iterations: power_iteration_cap(m.cols()),
    })
}

/// Smallest singular value `√λmin(AᵀA)`, by inverse power iteration on
/// `AᵀA`. Zero for wide or numerically rank-deficient input.
pub fn min_singular_value<M: Dense + ?Sized>(a: &M) -> Result<f64> {
    let m = a.to_matrix();
    if m.rows() < m.cols() {
        return Ok(0.0);
    }
    let l = match cholesky_factor(&m.gram()) {
        Ok(l) => l,
        Err(Error::NotPositiveDefinite { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let mut v = start_vector(m.cols());
    normalize(&mut v);
    let mut estimate = 0.0_f64;
    for _ in 0..power_iteration_cap(m.cols()) {
        let mut w = l.solve_transpose(&l.solve(&v));
        let next = dot(&v, &w);
        normalize(&mut w);
        if (next - estimate).abs() <= OP_NORM_TOL * next {
            return Ok((1.0 / next).sqrt());
        }
        estimate = next;
        v = w;
    }
    Err(Error::NonConvergence {
        what: "minimum singular value inverse iteration",
        iterations: power_iteration_cap(m.cols()),
    })
}

/// Observations in rows, variables in columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DataTable {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataTable {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        Ok(DataTable { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        Self::new(m.rows(), m.cols(), m.into_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `S = n⁻¹ Σ yᵢyᵢᵀ`, optionally after subtracting column means.
///
/// Columns with zero variance are allowed here; the correlation transform
/// rejects them.
pub fn sample_covariance(data: &DataTable, center: bool) -> Result<SymMatrix> {
    let (n, p) = (data.n(), data.p());
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 observations, got {n}")));
    }
    if p < 1 {
        return Err(Error::invalid("need at least 1 variable"));
    }
    if data.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data contains non-finite values"));
    }
    let mut means = vec![0.0; p];
    if center {
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
    }
    let centered: Vec<f64> = (0..n)
        .flat_map(|i| data.row(i).iter().zip(&means).map(|(v, m)| v - m).collect::<Vec<_>>())
        .collect();
    let gram = Matrix::from_vec(n, p, centered)?.gram();
    Ok(gram.scaled(1.0 / n as f64))
}

/// Sample correlation `Ŵ⁻¹SŴ⁻¹` together with `Ŵ = diag(√Sᵢᵢ)`.
/// The returned correlation has an exact unit diagonal.
pub fn to_correlation(s: &SymMatrix) -> Result<(SymMatrix, DiagMatrix)> {
    let p = s.dim();
    let mut scale = Vec::with_capacity(p);
    for i in 0..p {
        let v = s.get(i, i);
        if !(v > 0.0) {
            return Err(Error::DegenerateColumn { column: i });
        }
        scale.push(v.sqrt());
    }
    let gamma = SymMatrix::from_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            s.get(i, j) / (scale[i] * scale[j])
        }
    });
    Ok((gamma, DiagMatrix(scale)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cholesky_of_identity_is_identity() {
        let l = cholesky_factor(&SymMatrix::identity(3)).unwrap();
        assert_eq!(l, LowerTriangular::identity(3));
    }

    #[test]
    fn cholesky_small_example() {
        let a = sym(&[&[4.0, 2.0], &[2.0, 2.0]]);
        let l = cholesky_factor(&a).unwrap();
        assert_eq!(l.data(), &[2.0, 0.0, 1.0, 1.0]);
        assert_eq!(l.times_transpose(), a);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = sym(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(cholesky_factor(&a), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn cholesky_floor_is_scale_relative() {
        let a = sym(&[&[1e6, 0.0], &[0.0, 1e-7]]);
        assert!(cholesky_factor(&a).is_err());
        let b = sym(&[&[1e-6, 0.0], &[0.0, 1e-7]]);
        assert!(cholesky_factor(&b).is_ok());
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log_det(&SymMatrix::identity(3)).unwrap(), 0.0);
        let d = log_det(&SymMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!((d - 8f64.ln()).abs() < 1e-14);
        let d = log_det(&sym(&[&[4.0, 2.0], &[2.0, 2.0]])).unwrap();
        assert!((d - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_examples() {
        let d = SymMatrix::from_diag(&[-3.0, 2.0]);
        assert!((operator_norm(&d).unwrap() - 3.0).abs() < 1e-8);
        let nil = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!((operator_norm(&nil).unwrap() - 1.0).abs() < 1e-8);
        assert!((operator_norm(&SymMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&SymMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn min_singular_value_of_diagonal() {
        let d = SymMatrix::from_diag(&[-3.0, 2.0, 5.0]);
        assert!((min_singular_value(&d).unwrap() - 2.0).abs() < 1e-8);
        let singular = sym(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(min_singular_value(&singular).unwrap(), 0.0);
        let tall = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!((min_singular_value(&tall).unwrap() - 3.0).abs() < 1e-8);
        assert_eq!(min_singular_value(&tall.transpose()).unwrap(), 0.0);
    }

    #[test]
    fn frobenius_examples() {
        assert!((frobenius_norm(&SymMatrix::identity(3)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(frobenius_norm(&SymMatrix::zeros(4)), 0.0);
        let m = Matrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(frobenius_norm(&m), 5.0);
    }

    #[test]
    fn sample_covariance_examples() {
        let data = DataTable::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let s = sample_covariance(&data, false).unwrap();
        assert_eq!(s, sym(&[&[1.0, 0.0], &[0.0, 0.0]]));
        let data = DataTable::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(sample_covariance(&data, true).unwrap(), SymMatrix::zeros(2));
    }

    #[test]
    fn sample_covariance_rejects_bad_input() {
        let one = DataTable::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(sample_covariance(&one, true).is_err());
        let nan = DataTable::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]).unwrap();
        assert!(sample_covariance(&nan, true).is_err());
    }

    #[test]
    fn correlation_examples() {
        let (g, w) = to_correlation(&SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(g, SymMatrix::identity(2));
        assert_eq!(w.values(), &[2.0, 3.0]);
        let (g, w) = to_correlation(&sym(&[&[4.0, 2.0], &[2.0, 4.0]])).unwrap();
        assert_eq!(g, sym(&[&[1.0, 0.5], &[0.5, 1.0]]));
        assert_eq!(w.values(), &[2.0, 2.0]);
    }

    #[test]
    fn correlation_rejects_zero_variance() {
        let s = SymMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(to_correlation(&s), Err(Error::DegenerateColumn { column: 1 })));
    }

    #[test]
    fn construction_symmetrizes() {
        let s = SymMatrix::new(2, vec![1.0, 0.2, 0.4, 1.0]).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
        assert!((s.get(0, 1) - 0.3).abs() < 1e-15);
        assert!(SymMatrix::new(0, vec![]).is_err());
    }

    #[test]
    fn inverse_and_triangular_solves() {
        let a = sym(&[&[4.0, 2.0, 0.4], &[2.0, 3.0, 0.5], &[0.4, 0.5, 2.0]]);
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        let err = frobenius_norm(&prod.sub(&Matrix::identity(3)).unwrap());
        assert!(err < 1e-13);
        let l = cholesky_factor(&a).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = l.solve_transpose(&l.solve(&b));
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
