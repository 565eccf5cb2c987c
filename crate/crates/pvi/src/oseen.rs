//! Stationary Oseen-type variational inequality solver.
//!
//! The discrete problem: given a frozen velocity `w`, a shift `λ ≥ 0` and an
//! H-load `rhs`, find a feasible `u` with
//!
//! ```text
//! (v - u)ᵀ (L u - M·rhs) + φ(v) - φ(u) >= 0   for all v,     L = λM + S + N(w).
//! ```
//!
//! The solver is proximal coordinate relaxation: sweeps visit the
//! coordinates in ascending then descending order, and each visit solves its
//! scalar subproblem exactly through the nodewise prox. Correctness does not
//! rest on the iteration theory: every returned solution carries the
//! natural-map residual `‖u - p(u)‖_H`, which vanishes exactly at solutions,
//! and `certified` records whether it reached the requested tolerance.
//!
//! For desk-scale cross-checks, [`brute_force_vi`] enumerates active-set (or
//! sign) patterns and returns the unique pattern passing the optimality
//! checks.

use nalgebra::{DMatrix, DVector};

use crate::convection::ConvectionOperator;
use crate::functional::ConvexFunctional;
use crate::gelfand::DiscreteGelfand;
use crate::{Error, Result};

/// Result of a stationary solve.
#[derive(Debug, Clone)]
pub struct StationarySolve {
    pub u: DVector<f64>,
    /// Number of coordinate sweeps performed.
    pub iterations: usize,
    /// Natural-map residual `‖u - p(u)‖_H` at return.
    pub residual: f64,
    pub lambda: f64,
    /// Whether `residual <= tol`.
    pub certified: bool,
}

/// Default sweep budget.
pub fn default_max_sweeps(dim: usize) -> usize {
    50 * dim
}

fn check_lengths(g: &DiscreteGelfand, vs: &[&DVector<f64>]) -> Result<()> {
    for v in vs {
        if v.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                expected: g.dim(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Assembles `L = λM + S + N(w)`.
pub fn system_matrix(
    g: &DiscreteGelfand,
    op: &ConvectionOperator,
    lambda: f64,
    w: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_lengths(g, &[w])?;
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let mut l = g.stiffness().clone();
    l += g.mass() * lambda;
    if !op.is_zero() {
        l += op.matrix(w)?;
    }
    Ok(l)
}

fn natural_map_residual(
    g: &DiscreteGelfand,
    phi: &ConvexFunctional,
    l: &DMatrix<f64>,
    b: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let grad = l * u - b;
    let mut p = DVector::zeros(u.len());
    for i in 0..u.len() {
        let q = l[(i, i)];
        if q <= 0.0 {
            return Err(Error::NonpositiveDiagonal { index: i });
        }
        p[i] = phi.prox_node(i, q, grad[i] - q * u[i])?;
    }
    Ok(g.h_norm(&(u - p)))
}

/// Natural-map residual of a candidate solution; zero exactly at solutions
/// of the discrete variational inequality.
#[allow(clippy::too_many_arguments)]
pub fn vi_residual(
    g: &DiscreteGelfand,
    phi: &ConvexFunctional,
    op: &ConvectionOperator,
    lambda: f64,
    w: &DVector<f64>,
    u: &DVector<f64>,
    rhs: &DVector<f64>,
) -> Result<f64> {
    check_lengths(g, &[u, rhs])?;
    let l = system_matrix(g, op, lambda, w)?;
    let b = g.mass() * rhs;
    natural_map_residual(g, phi, &l, &b, u)
}

/// Solves the stationary variational inequality by symmetric-sweep proximal
/// coordinate relaxation.
///
/// `init` warm-starts the iteration (the previous time level inside the time
/// stepper); without it the start point is the feasibility projection of the
/// diagonal guess. Termination: natural-map residual `<= tol`, or the sweep
/// budget is exhausted (the result is then returned with `certified =
/// false`).
#[allow(clippy::too_many_arguments)]
pub fn solve_stationary_vi(
    g: &DiscreteGelfand,
    phi: &ConvexFunctional,
    op: &ConvectionOperator,
    lambda: f64,
    w: &DVector<f64>,
    rhs: &DVector<f64>,
    tol: f64,
    max_sweeps: usize,
    init: Option<&DVector<f64>>,
) -> Result<StationarySolve> {
    check_lengths(g, &[w, rhs])?;
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let dim = g.dim();
    let l = system_matrix(g, op, lambda, w)?;
    for i in 0..dim {
        if l[(i, i)] <= 0.0 {
            return Err(Error::NonpositiveDiagonal { index: i });
        }
    }
    let b = g.mass() * rhs;

    let mut u = match init {
        Some(u0) => {
            check_lengths(g, &[u0])?;
            phi.project(u0)
        }
        None => {
            let mut u0 = DVector::zeros(dim);
            for i in 0..dim {
                u0[i] = phi.prox_node(i, l[(i, i)], -b[i])?;
            }
            u0
        }
    };

    let mut residual = natural_map_residual(g, phi, &l, &b, &u)?;
    let mut iterations = 0;
    while residual > tol && iterations < max_sweeps {
        let ascending = iterations % 2 == 0;
        for k in 0..dim {
            let i = if ascending { k } else { dim - 1 - k };
            let q = l[(i, i)];
            let row_dot = l.row(i).transpose().dot(&u);
            let r = row_dot - b[i] - q * u[i];
            u[i] = phi.prox_node(i, q, r)?;
        }
        iterations += 1;
        residual = natural_map_residual(g, phi, &l, &b, &u)?;
    }

    Ok(StationarySolve {
        certified: residual <= tol,
        u,
        iterations,
        residual,
        lambda,
    })
}

const ORACLE_TOL: f64 = 1e-10;

/// Enumeration oracle for small problems: tries every active-set pattern
/// (obstacle) or sign pattern (friction), solves the reduced linear system
/// and returns the pattern passing primal feasibility and multiplier sign
/// checks. Obstacle/zero kinds accept dimensions up to 14; friction up to 9.
pub fn brute_force_vi(
    g: &DiscreteGelfand,
    phi: &ConvexFunctional,
    op: &ConvectionOperator,
    lambda: f64,
    w: &DVector<f64>,
    rhs: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_lengths(g, &[w, rhs])?;
    let dim = g.dim();
    let l = system_matrix(g, op, lambda, w)?;
    let b = g.mass() * rhs;
    let scale = 1.0 + b.amax().max(l.amax());
    let tol = ORACLE_TOL * scale;

    let solve_dense = |m: &DMatrix<f64>, v: &DVector<f64>| -> Option<DVector<f64>> {
        m.clone().lu().solve(v)
    };

    match phi {
        ConvexFunctional::Zero { .. } => {
            solve_dense(&l, &b).ok_or(Error::NoKktPattern)
        }
        ConvexFunctional::Obstacle { lower } => {
            if dim > 14 {
                return Err(Error::InvalidParameter(format!(
                    "active-set enumeration limited to dim <= 14, got {dim}"
                )));
            }
            let constrained: Vec<usize> =
                (0..dim).filter(|&i| lower[i].is_finite()).collect();
            for mask in 0u32..(1u32 << constrained.len()) {
                let mut active = vec![false; dim];
                for (bit, &i) in constrained.iter().enumerate() {
                    active[i] = mask & (1 << bit) != 0;
                }
                let inactive: Vec<usize> = (0..dim).filter(|&i| !active[i]).collect();
                let mut u = DVector::zeros(dim);
                for i in 0..dim {
                    if active[i] {
                        u[i] = lower[i];
                    }
                }
                if !inactive.is_empty() {
                    let li = DMatrix::from_fn(inactive.len(), inactive.len(), |r, c| {
                        l[(inactive[r], inactive[c])]
                    });
                    let mut bi = DVector::from_fn(inactive.len(), |r, _| b[inactive[r]]);
                    for (r, &i) in inactive.iter().enumerate() {
                        for j in 0..dim {
                            if active[j] {
                                bi[r] -= l[(i, j)] * u[j];
                            }
                        }
                    }
                    let Some(ui) = solve_dense(&li, &bi) else {
                        continue;
                    };
                    for (r, &i) in inactive.iter().enumerate() {
                        u[i] = ui[r];
                    }
                }
                let grad = &l * &u - &b;
                let primal_ok = inactive
                    .iter()
                    .all(|&i| !lower[i].is_finite() || u[i] >= lower[i] - tol);
                let dual_ok = (0..dim).all(|i| !active[i] || grad[i] >= -tol);
                if primal_ok && dual_ok {
                    return Ok(u);
                }
            }
            Err(Error::NoKktPattern)
        }
        ConvexFunctional::Friction { weights } => {
            let weighted: Vec<usize> = (0..dim).filter(|&i| weights[i] > 0.0).collect();
            if weighted.len() > 9 || dim > 14 {
                return Err(Error::InvalidParameter(format!(
                    "sign enumeration limited to 9 weighted nodes and dim <= 14, got {} and {dim}",
                    weighted.len()
                )));
            }
            let patterns = 3usize.pow(weighted.len() as u32);
            for code in 0..patterns {
                let mut signs = vec![0i8; dim];
                let mut rem = code;
                for &i in &weighted {
                    signs[i] = [0i8, 1, -1][rem % 3];
                    rem /= 3;
                }
                // Free nodes: unweighted ones plus weighted nodes with a
                // nonzero sign guess; pinned nodes sit at zero.
                let free: Vec<usize> = (0..dim)
                    .filter(|&i| weights[i] == 0.0 || signs[i] != 0)
                    .collect();
                let mut u = DVector::zeros(dim);
                if !free.is_empty() {
                    let lf = DMatrix::from_fn(free.len(), free.len(), |r, c| {
                        l[(free[r], free[c])]
                    });
                    let bf = DVector::from_fn(free.len(), |r, _| {
                        b[free[r]] - f64::from(signs[free[r]]) * weights[free[r]]
                    });
                    let Some(uf) = solve_dense(&lf, &bf) else {
                        continue;
                    };
                    for (r, &i) in free.iter().enumerate() {
                        u[i] = uf[r];
                    }
                }
                let grad = &l * &u - &b;
                let mut ok = true;
                for i in 0..dim {
                    if weights[i] == 0.0 {
                        continue;
                    }
                    if signs[i] == 0 {
                        if grad[i].abs() > weights[i] + tol {
                            ok = false;
                            break;
                        }
                    } else if f64::from(signs[i]) * u[i] < -tol {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return Ok(u);
                }
            }
            Err(Error::NoKktPattern)
        }
    }
}
