//! The convective bilinear operator.
//!
//! The trilinear form is realized through a state-dependent matrix:
//! `⟨B(w, u), v⟩ = vᵀ N(w) u` with `N(w)` exactly linear in `w`. The shipped
//! discretizations all take the form `N(w) = diag(w) · C` for a fixed
//! stencil matrix `C` that bundles the lumped quadrature weight, the
//! convection coefficient and a one-sided difference. Linearity in `w` is
//! then structural rather than approximate.
//!
//! The one-sided difference direction is fixed per spatial dimension by the
//! sign of the convection coefficient. On the obstacle cone (`w ≥ 0`) this
//! coincides with upwinding against the local velocity `c·wᵢ` and yields
//! nonpositive off-diagonal entries, the property the coordinate solver
//! relies on.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum ConvectionOperator {
    /// `B ≡ 0`.
    Zero { dim: usize },
    /// `N(w) = diag(w) · stencil`.
    PointwiseVelocity { stencil: DMatrix<f64> },
}

impl ConvectionOperator {
    pub fn zero(dim: usize) -> Self {
        ConvectionOperator::Zero { dim }
    }

    pub fn pointwise(stencil: DMatrix<f64>) -> Self {
        ConvectionOperator::PointwiseVelocity { stencil }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvectionOperator::Zero { dim } => *dim,
            ConvectionOperator::PointwiseVelocity { stencil } => stencil.nrows(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ConvectionOperator::Zero { .. })
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

    /// Assembles the matrix `N(w)`.
    pub fn matrix(&self, w: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(w)?;
        Ok(match self {
            ConvectionOperator::Zero { dim } => DMatrix::zeros(*dim, *dim),
            ConvectionOperator::PointwiseVelocity { stencil } => {
                let mut n = stencil.clone();
                for (i, mut row) in n.row_iter_mut().enumerate() {
                    row *= w[i];
                }
                n
            }
        })
    }

    /// Applies `N(w)` to `u` without materializing the matrix.
    pub fn apply(&self, w: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(w)?;
        self.check_dim(u)?;
        Ok(match self {
            ConvectionOperator::Zero { dim } => DVector::zeros(*dim),
            ConvectionOperator::PointwiseVelocity { stencil } => {
                let mut out = stencil * u;
                out.component_mul_assign(w);
                out
            }
        })
    }

    /// The trilinear form value `vᵀ N(w) u`.
    pub fn trilinear(&self, w: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.apply(w, u)?.dot(v))
    }
}
