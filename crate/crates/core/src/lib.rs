//! Sparse estimation of covariance, precision, correlation, inverse-correlation
//! and modified-Cholesky factors by penalized Gaussian likelihood, with L1,
//! SCAD and hard-thresholding penalties handled through local linear
//! approximation.
//!
//! The crate also ships a Monte Carlo harness ([`simulation`]) that measures
//! rates of convergence and support recovery on synthetic truths.

pub mod cholesky;
pub mod error;
pub mod estimators;
pub mod io;
pub mod matrix;
pub mod penalty;
pub mod simulation;
pub mod solvers;
pub mod tuning;

pub use cholesky::{mcd, CholeskyFit, McdPair};
pub use error::{Error, Result};
pub use estimators::{estimate, EstimationResult, EstimatorConfig, Init, Target};
pub use matrix::{DataTable, DiagMatrix, LowerTriangular, Matrix, SymMatrix};
pub use penalty::Penalty;
pub use simulation::{RateExperiment, RateReport, TruthKind, TruthSpec};
pub use solvers::{SolverOptions, WeightMatrix};
pub use tuning::{select_lambda, LambdaGrid, Selection, SelectionRow};
