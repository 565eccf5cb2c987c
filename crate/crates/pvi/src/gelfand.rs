//! The discretized space triple: mass matrix, stiffness matrix, W-norm.
//!
//! After spatial discretization and boundary elimination, the continuous
//! triple V ⊂ H ⊂ V' collapses to a single coordinate space of dimension
//! `dim` carrying three norms:
//!
//! - the H-norm `sqrt(vᵀ M v)` from the mass matrix,
//! - the V-norm `sqrt(vᵀ S_sym v)` from the symmetric part of the stiffness
//!   matrix (the energy norm; the bilinear form is renormalized so that the
//!   V-norm *is* `sqrt(a(v, v))`),
//! - the W-norm `sqrt(‖M⁻¹Sv‖_H² + ‖v‖_V²)`, the discrete stand-in for the
//!   stronger regularity space: the H-norm of the discrete operator image
//!   plus the energy norm.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::{Error, Result};

/// The three norms of a vector, as returned by [`DiscreteGelfand::norm_triple`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub h: f64,
    pub v: f64,
    pub w: f64,
}

/// Discretized Gelfand triple: mass and stiffness matrices plus the derived
/// W-norm operator.
///
/// The mass matrix must be symmetric positive definite (it is diagonal for
/// both shipped problem families). The stiffness matrix must be coercive
/// (`vᵀSv > 0` for `v ≠ 0`) but need not be symmetric; all V-norm values use
/// its symmetric part.
#[derive(Debug, Clone)]
pub struct DiscreteGelfand {
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    stiffness_sym: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
}

impl DiscreteGelfand {
    /// Builds the triple, validating symmetry and positivity of the mass
    /// matrix and coercivity of the stiffness's symmetric part.
    pub fn new(mass: DMatrix<f64>, stiffness: DMatrix<f64>) -> Result<Self> {
        let dim = mass.nrows();
        if mass.ncols() != dim || stiffness.nrows() != dim || stiffness.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: stiffness.nrows().max(stiffness.ncols()).max(mass.ncols()),
            });
        }
        if dim == 0 {
            return Err(Error::InvalidSpec("empty space (dim = 0)".into()));
        }
        let scale = mass.amax();
        for i in 0..dim {
            for j in 0..i {
                if (mass[(i, j)] - mass[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidSpec(format!(
                        "mass matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mass_chol = Cholesky::new(mass.clone())
            .ok_or_else(|| Error::InvalidSpec("mass matrix not positive definite".into()))?;
        let stiffness_sym = (&stiffness + stiffness.transpose()) * 0.5;
        if Cholesky::new(stiffness_sym.clone()).is_none() {
            return Err(Error::InvalidSpec(
                "stiffness matrix not coercive (symmetric part not positive definite)".into(),
            ));
        }
        Ok(Self {
            mass,
            stiffness,
            stiffness_sym,
            mass_chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Symmetric part of the stiffness matrix (defines the V-norm).
    pub fn stiffness_sym(&self) -> &DMatrix<f64> {
        &self.stiffness_sym
    }

    pub fn h_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.mass * b).dot(a)
    }

    pub fn h_norm(&self, v: &DVector<f64>) -> f64 {
        self.h_inner(v, v).max(0.0).sqrt()
    }

    pub fn v_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (&self.stiffness_sym * b).dot(a)
    }

    pub fn v_norm(&self, v: &DVector<f64>) -> f64 {
        self.v_inner(v, v).max(0.0).sqrt()
    }

    /// H-norm of the discrete operator image `M⁻¹Sv`.
    pub fn operator_image_h_norm(&self, v: &DVector<f64>) -> f64 {
        let sv = &self.stiffness * v;
        let z = self.mass_chol.solve(&sv);
        z.dot(&sv).max(0.0).sqrt()
    }

    pub fn w_norm(&self, v: &DVector<f64>) -> f64 {
        let a = self.operator_image_h_norm(v);
        let b = self.v_norm(v);
        (a * a + b * b).sqrt()
    }

    /// Solves `M x = b` (used to map dual/load representations into H).
    pub fn mass_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.mass_chol.solve(b)
    }

    /// All three norms at once, with a hard dimension check.
    pub fn norm_triple(&self, v: &DVector<f64>) -> Result<Norms> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(Norms {
            h: self.h_norm(v),
            v: self.v_norm(v),
            w: self.w_norm(v),
        })
    }
}
