//! The convex nonsmooth term: evaluation, nodewise prox, feasibility.
//!
//! Three kinds are shipped, all separable across degrees of freedom:
//! `Zero` (no constraint), `Obstacle` (indicator of componentwise lower
//! bounds; the bounds may be `-inf` at individual nodes) and `Friction`
//! (weighted l1 penalty; the weights encode the friction coefficient times
//! the boundary surface measure, so interior nodes carry weight zero).
//!
//! Evaluation is strict: an obstacle violation of any size yields `+inf`.
//! Solvers never rely on tolerant evaluation because the nodewise prox keeps
//! iterates feasible by construction.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ConvexFunctional {
    Zero { dim: usize },
    Obstacle { lower: Vec<f64> },
    Friction { weights: Vec<f64> },
}

impl ConvexFunctional {
    pub fn zero(dim: usize) -> Self {
        ConvexFunctional::Zero { dim }
    }

    pub fn obstacle(lower: DVector<f64>) -> Self {
        ConvexFunctional::Obstacle {
            lower: lower.iter().copied().collect(),
        }
    }

    /// Weighted l1 friction term; weights must be nonnegative.
    pub fn friction(weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "friction weights must be finite and nonnegative".into(),
            ));
        }
        Ok(ConvexFunctional::Friction {
            weights: weights.iter().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunctional::Zero { dim } => *dim,
            ConvexFunctional::Obstacle { lower } => lower.len(),
            ConvexFunctional::Friction { weights } => weights.len(),
        }
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the functional; `+inf` outside the effective domain.
    pub fn eval(&self, v: &DVector<f64>) -> Result<f64> {
        self.check_dim(v)?;
        Ok(match self {
            ConvexFunctional::Zero { .. } => 0.0,
            ConvexFunctional::Obstacle { lower } => {
                if v.iter().zip(lower).all(|(&x, &b)| x >= b) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ConvexFunctional::Friction { weights } => {
                v.iter().zip(weights).map(|(&x, &w)| w * x.abs()).sum()
            }
        })
    }

    pub fn is_feasible(&self, v: &DVector<f64>) -> bool {
        matches!(self.eval(v), Ok(x) if x.is_finite())
    }

    /// Componentwise projection onto the effective domain (the clamp for
    /// obstacles; the identity otherwise).
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            ConvexFunctional::Obstacle { lower } => {
                DVector::from_iterator(v.len(), v.iter().zip(lower).map(|(&x, &b)| x.max(b)))
            }
            _ => v.clone(),
        }
    }

    /// Exact minimizer of the scalar subproblem `x ↦ q x²/2 + r x + φ_i(x)`.
    ///
    /// This is the single building block of the coordinate solver: zero kind
    /// gives the quadratic minimum, obstacle clamps it at the node's bound,
    /// friction soft-thresholds the load.
    pub fn prox_node(&self, i: usize, q: f64, r: f64) -> Result<f64> {
        if q <= 0.0 || !q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prox requires a positive quadratic coefficient, got {q}"
            )));
        }
        if i >= self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: i,
            });
        }
        Ok(match self {
            ConvexFunctional::Zero { .. } => -r / q,
            ConvexFunctional::Obstacle { lower } => (-r / q).max(lower[i]),
            ConvexFunctional::Friction { weights } => {
                let w = weights[i];
                if r.abs() <= w {
                    0.0
                } else {
                    -r.signum() * (r.abs() - w) / q
                }
            }
        })
    }

    /// A member of the (Euclidean) subdifferential at a feasible point, i.e.
    /// a vector `s` with `φ(v) - φ(u) >= sᵀ(v - u)` for all `v`.
    pub fn subgradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(u)?;
        if !self.is_feasible(u) {
            return Err(Error::Infeasible(
                "subgradient requested outside the effective domain".into(),
            ));
        }
        Ok(match self {
            ConvexFunctional::Zero { dim } => DVector::zeros(*dim),
            // Zero is always a valid member: active coordinates admit any
            // nonpositive slope, inactive ones exactly zero.
            ConvexFunctional::Obstacle { lower } => DVector::zeros(lower.len()),
            ConvexFunctional::Friction { weights } => DVector::from_iterator(
                u.len(),
                u.iter()
                    .zip(weights)
                    .map(|(&x, &w)| if x == 0.0 { 0.0 } else { w * x.signum() }),
            ),
        })
    }
}
