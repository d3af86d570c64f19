//! Penalty families `p_λ(θ)` applied to off-diagonal parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Penalty {
    /// `λ|θ|`
    L1 { lambda: f64 },
    /// Smoothly clipped absolute deviation with shape `a > 2`.
    Scad { lambda: f64, a: f64 },
    /// `λ² − (|θ| − λ)² 1{|θ| < λ}`
    Hard { lambda: f64 },
}

impl Penalty {
    pub fn l1(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Penalty::L1 { lambda })
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::invalid(format!("SCAD shape must exceed 2, got {a}")));
        }
        Ok(Penalty::Scad { lambda, a })
    }

    pub fn hard(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Penalty::Hard { lambda })
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            Penalty::L1 { lambda } | Penalty::Scad { lambda, .. } | Penalty::Hard { lambda } => {
                lambda
            }
        }
    }

    /// Same family and shape with a different `λ`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        match *self {
            Penalty::L1 { .. } => Penalty::l1(lambda),
            Penalty::Scad { a, .. } => Penalty::scad(lambda, a),
            Penalty::Hard { .. } => Penalty::hard(lambda),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Penalty::L1 { .. } => "l1",
            Penalty::Scad { .. } => "scad",
            Penalty::Hard { .. } => "hard",
        }
    }

    /// `p_λ(θ)`; even in `θ`, zero at the origin.
    pub fn value(&self, theta: f64) -> f64 {
        let t = theta.abs();
        match *self {
            Penalty::L1 { lambda } => lambda * t,
            Penalty::Scad { lambda, a } => {
                if t <= lambda {
                    lambda * t
                } else if t <= a * lambda {
                    (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
                } else {
                    0.5 * (a + 1.0) * lambda * lambda
                }
            }
            Penalty::Hard { lambda } => {
                if t < lambda {
                    let d = t - lambda;
                    lambda * lambda - d * d
                } else {
                    lambda * lambda
                }
            }
        }
    }

    /// Right derivative `p'_λ(θ)` for `θ ≥ 0`. Negative input is treated as
    /// its magnitude.
    pub fn derivative(&self, theta: f64) -> f64 {
        let t = theta.abs();
        match *self {
            Penalty::L1 { lambda } => lambda,
            Penalty::Scad { lambda, a } => {
                if t <= lambda {
                    lambda
                } else {
                    (a * lambda - t).max(0.0) / (a - 1.0)
                }
            }
            Penalty::Hard { lambda } => (2.0 * (lambda - t)).max(0.0),
        }
    }

    /// `lim_{t↓0} p_λ(t)/t`.
    pub fn slope_at_origin(&self) -> f64 {
        self.derivative(0.0)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must be finite and non-negative, got {lambda}")))
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Penalty::L1 { lambda } => write!(f, "l1:{lambda}"),
            Penalty::Scad { lambda, a } => write!(f, "scad:{lambda}:{a}"),
            Penalty::Hard { lambda } => write!(f, "hard:{lambda}"),
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    /// Parses `l1:λ`, `scad:λ[:a]` or `hard:λ`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |idx: usize| -> Result<f64> {
            parts
                .get(idx)
                .ok_or_else(|| Error::invalid(format!("penalty '{s}' is missing a value")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("penalty '{s}': {e}")))
        };
        match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("l1", 2) => Penalty::l1(num(1)?),
            ("hard", 2) => Penalty::hard(num(1)?),
            ("scad", 2) => Penalty::scad(num(1)?, DEFAULT_SCAD_A),
            ("scad", 3) => Penalty::scad(num(1)?, num(2)?),
            _ => Err(Error::invalid(format!(
                "unrecognized penalty '{s}' (expected l1:λ, scad:λ[:a] or hard:λ)"
            ))),
        }
    }
}
