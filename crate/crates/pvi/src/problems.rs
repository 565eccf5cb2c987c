//! Shipped problem assemblies and named presets.
//!
//! Three discretized families are provided, plus the scalar identity
//! problem used by closed-form fixtures:
//!
//! - `obstacle_cd_1d`/`obstacle_cd_2d`: convection-diffusion with a lower
//!   obstacle on tensor grids. Lumped (diagonal) mass, central second-order
//!   diffusion with eliminated Dirichlet boundary, first-order upwind
//!   convection. The upwind side is fixed per dimension by the sign of the
//!   convection coefficient; on the obstacle cone (states `>= 0`) this
//!   agrees with upwinding against the local velocity and keeps the system
//!   matrix an M-matrix.
//! - `friction_neumann_1d`: Neumann diffusion on all grid nodes with a
//!   weighted l1 friction term on the two boundary nodes. A reaction term
//!   `ε0·M` is added to the stiffness so the bilinear form is coercive.
//! - `linear_scalar`: one degree of freedom with identity mass and
//!   stiffness, no constraint, no convection.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::convection::ConvectionOperator;
use crate::functional::ConvexFunctional;
use crate::gelfand::DiscreteGelfand;
use crate::load::{Load, TimeProfile};
use crate::oseen::solve_stationary_vi;
use crate::rothe::RotheConfig;
use crate::{Error, Result};

/// A fully assembled problem: spaces, functional, convection and constants.
#[derive(Debug, Clone)]
pub struct Problem {
    pub gelfand: DiscreteGelfand,
    pub phi: ConvexFunctional,
    pub convection: ConvectionOperator,
    pub ledger: ConstantsLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    LinearScalar,
    ObstacleCd1d,
    ObstacleCd2d,
    FrictionNeumann1d,
}

/// Declarative description of a problem instance; the config-file surface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Nodes per dimension: interior nodes for the obstacle kinds, total
    /// nodes (boundary included) for the friction kind.
    #[serde(default)]
    pub resolution: Vec<usize>,
    /// Domain intervals per dimension; defaults to the unit interval(s).
    #[serde(default)]
    pub domain: Vec<[f64; 2]>,
    /// Convection coefficient vector `c` in `b(u) = c·u`.
    #[serde(default)]
    pub convection: Vec<f64>,
    #[serde(default = "default_diffusion")]
    pub diffusion: f64,
    /// Lower bound for the obstacle kinds.
    #[serde(default)]
    pub obstacle_level: f64,
    /// Friction coefficients at the left and right boundary node.
    #[serde(default = "default_friction")]
    pub friction_weights: [f64; 2],
    /// Reaction coefficient `ε0` restoring coercivity for the friction kind.
    #[serde(default = "default_reaction")]
    pub reaction: f64,
}

fn default_diffusion() -> f64 {
    1.0
}
fn default_friction() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_reaction() -> f64 {
    1.0
}

impl ProblemSpec {
    pub fn linear_scalar() -> Self {
        ProblemSpec {
            kind: ProblemKind::LinearScalar,
            resolution: vec![1],
            domain: vec![],
            convection: vec![],
            diffusion: 1.0,
            obstacle_level: 0.0,
            friction_weights: [0.0, 0.0],
            reaction: 0.0,
        }
    }

    fn expected_dims(&self) -> usize {
        match self.kind {
            ProblemKind::LinearScalar => 0,
            ProblemKind::ObstacleCd2d => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ProblemKind::LinearScalar {
            return Ok(());
        }
        let d = self.expected_dims();
        if self.resolution.len() != d {
            return Err(Error::InvalidSpec(format!(
                "{:?} needs {d} resolution entr{}",
                self.kind,
                if d == 1 { "y" } else { "ies" }
            )));
        }
        if self.resolution.iter().any(|&n| n < 3) {
            return Err(Error::InvalidSpec("resolution must be >= 3".into()));
        }
        if !self.domain.is_empty() && self.domain.len() != d {
            return Err(Error::InvalidSpec(format!("domain needs {d} interval(s)")));
        }
        for iv in &self.domain {
            if !(iv[1] > iv[0]) {
                return Err(Error::InvalidSpec("domain intervals must be increasing".into()));
            }
        }
        if !self.convection.is_empty() && self.convection.len() != d {
            return Err(Error::InvalidSpec(format!(
                "convection coefficient needs {d} entr{}",
                if d == 1 { "y" } else { "ies" }
            )));
        }
        if !(self.diffusion > 0.0) {
            return Err(Error::InvalidSpec("diffusion must be positive".into()));
        }
        if self.kind == ProblemKind::FrictionNeumann1d {
            if self.friction_weights.iter().any(|&w| w < 0.0) {
                return Err(Error::InvalidSpec("friction weights must be >= 0".into()));
            }
            if !(self.reaction > 0.0) {
                return Err(Error::InvalidSpec(
                    "friction kind needs a positive reaction coefficient".into(),
                ));
            }
        }
        Ok(())
    }

    fn interval(&self, axis: usize) -> [f64; 2] {
        self.domain.get(axis).copied().unwrap_or([0.0, 1.0])
    }

    fn coeff(&self, axis: usize) -> f64 {
        self.convection.get(axis).copied().unwrap_or(0.0)
    }

    pub fn has_convection(&self) -> bool {
        self.convection.iter().any(|&c| c != 0.0)
    }

    /// Interior grid coordinates (obstacle kinds) or all node coordinates
    /// (friction kind) along one axis.
    pub fn grid(&self, axis: usize) -> Vec<f64> {
        let [a, b] = self.interval(axis);
        let n = self.resolution[axis];
        match self.kind {
            ProblemKind::FrictionNeumann1d => {
                let h = (b - a) / (n as f64 - 1.0);
                (0..n).map(|i| a + i as f64 * h).collect()
            }
            _ => {
                let h = (b - a) / (n as f64 + 1.0);
                (1..=n).map(|i| a + i as f64 * h).collect()
            }
        }
    }
}

/// 1D Dirichlet-eliminated diffusion matrix `(diff/h)·tridiag(-1, 2, -1)`
/// and its lumped mass `h·I`.
fn dirichlet_1d(n: usize, h: f64, diff: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let s = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * diff / h
        } else if i.abs_diff(j) == 1 {
            -diff / h
        } else {
            0.0
        }
    });
    let m = DMatrix::from_diagonal(&DVector::from_element(n, h));
    (s, m)
}

/// One-sided difference matrix on an eliminated-Dirichlet interior grid.
/// The difference direction is the upwind side for a flow of sign `c_sign`;
/// coefficients referencing the (zero) boundary are dropped.
fn upwind_difference_1d(n: usize, h: f64, c_sign: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        if c_sign >= 0.0 {
            d[(i, i)] = 1.0 / h;
            if i > 0 {
                d[(i, i - 1)] = -1.0 / h;
            }
        } else {
            d[(i, i)] = -1.0 / h;
            if i + 1 < n {
                d[(i, i + 1)] = 1.0 / h;
            }
        }
    }
    d
}

pub(crate) fn assemble_obstacle_1d(
    n: usize,
    interval: [f64; 2],
    diff: f64,
    c: f64,
    level: f64,
) -> Result<(DiscreteGelfand, ConvexFunctional, ConvectionOperator)> {
    let h = (interval[1] - interval[0]) / (n as f64 + 1.0);
    let (s, m) = dirichlet_1d(n, h, diff);
    let g = DiscreteGelfand::new(m, s)?;
    let phi = ConvexFunctional::obstacle(DVector::from_element(n, level));
    let op = if c == 0.0 {
        ConvectionOperator::zero(n)
    } else {
        // Row i of the stencil: lumped weight h times c times the upwind
        // difference, so N(w)u|_i = h·c·w_i·(∂u)_i.
        ConvectionOperator::pointwise(upwind_difference_1d(n, h, c) * (c * h))
    };
    Ok((g, phi, op))
}

pub(crate) fn assemble_obstacle_2d(
    nx: usize,
    ny: usize,
    ix: [f64; 2],
    iy: [f64; 2],
    diff: f64,
    c: [f64; 2],
    level: f64,
) -> Result<(DiscreteGelfand, ConvexFunctional, ConvectionOperator)> {
    let hx = (ix[1] - ix[0]) / (nx as f64 + 1.0);
    let hy = (iy[1] - iy[0]) / (ny as f64 + 1.0);
    let (sx, mx) = dirichlet_1d(nx, hx, diff);
    let (sy, my) = dirichlet_1d(ny, hy, diff);
    // Node index i = iy·nx + ix: y-blocks of x-rows.
    let stiffness = sy.kronecker(&mx) + my.kronecker(&sx);
    let mass = my.kronecker(&mx);
    let g = DiscreteGelfand::new(mass, stiffness)?;
    let dim = nx * ny;
    let phi = ConvexFunctional::obstacle(DVector::from_element(dim, level));
    let op = if c == [0.0, 0.0] {
        ConvectionOperator::zero(dim)
    } else {
        let ex = DMatrix::identity(nx, nx);
        let ey = DMatrix::identity(ny, ny);
        let dx = ey.kronecker(&upwind_difference_1d(nx, hx, c[0]));
        let dy = upwind_difference_1d(ny, hy, c[1]).kronecker(&ex);
        ConvectionOperator::pointwise((dx * c[0] + dy * c[1]) * (hx * hy))
    };
    Ok((g, phi, op))
}

pub(crate) fn assemble_friction_1d(
    n: usize,
    interval: [f64; 2],
    diff: f64,
    c: f64,
    weights: [f64; 2],
    reaction: f64,
) -> Result<(DiscreteGelfand, ConvexFunctional, ConvectionOperator)> {
    let h = (interval[1] - interval[0]) / (n as f64 - 1.0);
    let mut mass_diag = DVector::from_element(n, h);
    mass_diag[0] = 0.5 * h;
    mass_diag[n - 1] = 0.5 * h;
    let mass = DMatrix::from_diagonal(&mass_diag);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        let d = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
        s[(i, i)] = d * diff / h + reaction * mass_diag[i];
        if i > 0 {
            s[(i, i - 1)] = -diff / h;
        }
        if i + 1 < n {
            s[(i, i + 1)] = -diff / h;
        }
    }
    let g = DiscreteGelfand::new(mass, s)?;
    let mut w = DVector::zeros(n);
    // Boundary surface measure in 1D is the counting measure.
    w[0] = weights[0];
    w[n - 1] = weights[1];
    let phi = ConvexFunctional::friction(w)?;
    let op = if c == 0.0 {
        ConvectionOperator::zero(n)
    } else {
        let mut d = upwind_difference_1d(n, h, c);
        // A boundary node whose upstream neighbor sits outside the domain
        // takes the zero-gradient inflow convention (empty row).
        if c > 0.0 {
            d.row_mut(0).fill(0.0);
        } else {
            d.row_mut(n - 1).fill(0.0);
        }
        for i in 0..n {
            let row_scale = c * mass_diag[i];
            for j in 0..n {
                d[(i, j)] *= row_scale;
            }
        }
        ConvectionOperator::pointwise(d)
    };
    Ok((g, phi, op))
}

/// Assembles the discrete spaces, functional and convection operator.
pub fn build(
    spec: &ProblemSpec,
) -> Result<(DiscreteGelfand, ConvexFunctional, ConvectionOperator)> {
    spec.validate()?;
    match spec.kind {
        ProblemKind::LinearScalar => Ok((
            DiscreteGelfand::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1))?,
            ConvexFunctional::zero(1),
            ConvectionOperator::zero(1),
        )),
        ProblemKind::ObstacleCd1d => assemble_obstacle_1d(
            spec.resolution[0],
            spec.interval(0),
            spec.diffusion,
            spec.coeff(0),
            spec.obstacle_level,
        ),
        ProblemKind::ObstacleCd2d => assemble_obstacle_2d(
            spec.resolution[0],
            spec.resolution[1],
            spec.interval(0),
            spec.interval(1),
            spec.diffusion,
            [spec.coeff(0), spec.coeff(1)],
            spec.obstacle_level,
        ),
        ProblemKind::FrictionNeumann1d => assemble_friction_1d(
            spec.resolution[0],
            spec.interval(0),
            spec.diffusion,
            spec.coeff(0),
            spec.friction_weights,
            spec.reaction,
        ),
    }
}

/// Builds a [`Problem`] with the default ledger for the spec: zero
/// convection constants when `B ≡ 0`, neutral O(1) values otherwise.
pub fn build_problem(spec: &ProblemSpec) -> Result<Problem> {
    let (gelfand, phi, convection) = build(spec)?;
    let ledger = if spec.has_convection() {
        ConstantsLedger::default_convective()
    } else {
        ConstantsLedger::without_convection()
    };
    Ok(Problem {
        gelfand,
        phi,
        convection,
        ledger,
    })
}

pub const PRESET_NAMES: [&str; 7] = [
    "linear_scalar",
    "obstacle_smoke_1d",
    "obstacle_converge_1d",
    "obstacle_2d_small",
    "friction_smoke",
    "lipschitz_compatible",
    "lipschitz_incompatible",
];

fn vector_on_grid(xs: &[f64], f: impl Fn(f64) -> f64) -> DVector<f64> {
    DVector::from_iterator(xs.len(), xs.iter().map(|&x| f(x)))
}

/// Returns the named preset: a problem spec and a fully populated run
/// configuration. Unknown names list the available presets.
pub fn preset(name: &str) -> Result<(ProblemSpec, RotheConfig)> {
    use std::f64::consts::PI;
    match name {
        "linear_scalar" => {
            let spec = ProblemSpec::linear_scalar();
            let mut cfg = RotheConfig::new(0.125, 1.0, DVector::from_element(1, 1.0), Load::zero(1));
            cfg.solver_tol = 1e-12;
            Ok((spec, cfg))
        }
        "obstacle_smoke_1d" => {
            let spec = ProblemSpec {
                kind: ProblemKind::ObstacleCd1d,
                resolution: vec![31],
                domain: vec![[0.0, 1.0]],
                convection: vec![1.0],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.0, 0.0],
                reaction: 0.0,
            };
            let xs = spec.grid(0);
            let u0 = vector_on_grid(&xs, |x| (2.0 * PI * x).sin().max(0.0));
            let f = vector_on_grid(&xs, |x| -8.0 * (PI * x).sin());
            let cfg = RotheConfig::new(0.025, 0.5, u0, Load::constant(f));
            Ok((spec, cfg))
        }
        "obstacle_converge_1d" => {
            let spec = ProblemSpec {
                kind: ProblemKind::ObstacleCd1d,
                resolution: vec![31],
                domain: vec![[0.0, 1.0]],
                convection: vec![1.0],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.0, 0.0],
                reaction: 0.0,
            };
            let xs = spec.grid(0);
            let u0 = vector_on_grid(&xs, |x| (2.0 * PI * x).sin().max(0.0));
            let f = vector_on_grid(&xs, |x| -8.0 * (PI * x).sin());
            let cfg = RotheConfig::new(1.0 / 40.0, 0.4, u0, Load::constant(f));
            Ok((spec, cfg))
        }
        "obstacle_2d_small" => {
            let spec = ProblemSpec {
                kind: ProblemKind::ObstacleCd2d,
                resolution: vec![8, 8],
                domain: vec![[0.0, 1.0], [0.0, 1.0]],
                convection: vec![1.0, 0.5],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.0, 0.0],
                reaction: 0.0,
            };
            let xs = spec.grid(0);
            let ys = spec.grid(1);
            let mut u0 = DVector::zeros(xs.len() * ys.len());
            let mut f = DVector::zeros(xs.len() * ys.len());
            for (iy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    let i = iy * xs.len() + ix;
                    u0[i] = ((2.0 * PI * x).sin() * (PI * y).sin()).max(0.0);
                    f[i] = -4.0 * (PI * x).sin() * (PI * y).sin();
                }
            }
            let cfg = RotheConfig::new(0.02, 0.2, u0, Load::constant(f));
            Ok((spec, cfg))
        }
        "friction_smoke" => {
            let spec = ProblemSpec {
                kind: ProblemKind::FrictionNeumann1d,
                resolution: vec![21],
                domain: vec![[0.0, 1.0]],
                convection: vec![0.5],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.3, 0.3],
                reaction: 1.0,
            };
            let xs = spec.grid(0);
            let dim = xs.len();
            let f = vector_on_grid(&xs, |x| 0.5 * (PI * x).cos());
            let cfg = RotheConfig::new(0.05, 0.5, DVector::zeros(dim), Load::constant(f));
            Ok((spec, cfg))
        }
        "lipschitz_compatible" => {
            let spec = ProblemSpec {
                kind: ProblemKind::ObstacleCd1d,
                resolution: vec![31],
                domain: vec![[0.0, 1.0]],
                convection: vec![1.0],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.0, 0.0],
                reaction: 0.0,
            };
            let xs = spec.grid(0);
            let spatial = vector_on_grid(&xs, |x| 2.0 * (PI * x).sin());
            let load = Load::separable(spatial, TimeProfile::Linear);
            // Discrete compatibility: the initial state solves the
            // stationary problem for the load at t = 0.
            let problem = build_problem(&spec)?;
            let dim = problem.gelfand.dim();
            let f0 = load.eval(0.0);
            let w0 = DVector::zeros(dim);
            let solve = solve_stationary_vi(
                &problem.gelfand,
                &problem.phi,
                &ConvectionOperator::zero(dim),
                0.0,
                &w0,
                &f0,
                1e-12,
                50 * dim,
                None,
            )?;
            let cfg = RotheConfig::new(0.05, 0.5, solve.u, load);
            Ok((spec, cfg))
        }
        "lipschitz_incompatible" => {
            let spec = ProblemSpec {
                kind: ProblemKind::ObstacleCd1d,
                resolution: vec![31],
                domain: vec![[0.0, 1.0]],
                convection: vec![1.0],
                diffusion: 1.0,
                obstacle_level: 0.0,
                friction_weights: [0.0, 0.0],
                reaction: 0.0,
            };
            let xs = spec.grid(0);
            // A corner profile projected onto the feasible cone; its
            // discrete operator image blows up under refinement in time.
            let u0 = vector_on_grid(&xs, |x| (1.0 - 4.0 * (x - 0.5).abs()).max(0.0));
            let cfg = RotheConfig::new(0.05, 0.4, u0, Load::zero(xs.len()));
            Ok((spec, cfg))
        }
        _ => Err(Error::UnknownPreset {
            name: name.to_string(),
            known: PRESET_NAMES.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oseen::brute_force_vi;
    use approx::assert_relative_eq;

    #[test]
    fn obstacle_1d_hand_assembly() {
        let (g, phi, op) = assemble_obstacle_1d(3, [0.0, 1.0], 1.0, 0.0, 0.0).unwrap();
        assert_eq!(g.dim(), 3);
        let s = g.stiffness();
        assert_relative_eq!(s[(0, 0)], 8.0, epsilon = 1e-14);
        assert_relative_eq!(s[(0, 1)], -4.0, epsilon = 1e-14);
        assert_relative_eq!(s[(1, 2)], -4.0, epsilon = 1e-14);
        assert_relative_eq!(g.mass()[(1, 1)], 0.25, epsilon = 1e-14);
        assert!(matches!(phi, ConvexFunctional::Obstacle { .. }));
        assert!(op.is_zero());
    }

    #[test]
    fn friction_has_exactly_two_weighted_nodes() {
        let (_, phi, _) = assemble_friction_1d(3, [0.0, 1.0], 1.0, 0.0, [0.7, 0.9], 1.0).unwrap();
        match phi {
            ConvexFunctional::Friction { weights } => {
                assert_eq!(weights.iter().filter(|&&w| w != 0.0).count(), 2);
                assert_eq!(weights[0], 0.7);
                assert_eq!(weights[2], 0.9);
            }
            _ => panic!("expected friction kind"),
        }
    }

    #[test]
    fn obstacle_2d_five_point_stencil() {
        let (g, _, _) =
            assemble_obstacle_2d(4, 4, [0.0, 1.0], [0.0, 1.0], 1.0, [0.0, 0.0], 0.0).unwrap();
        assert_eq!(g.dim(), 16);
        // Interior node (ix=1, iy=1) -> index 5; neighbors at 4, 6, 1, 9.
        let s = g.stiffness();
        assert_relative_eq!(s[(5, 5)], 4.0, epsilon = 1e-13);
        for j in [4usize, 6, 1, 9] {
            assert_relative_eq!(s[(5, j)], -1.0, epsilon = 1e-13);
        }
        assert_relative_eq!(s[(5, 0)], 0.0, epsilon = 1e-15);
        // Symmetry.
        assert_relative_eq!(s, &s.transpose(), epsilon = 1e-13);
    }

    #[test]
    fn obstacle_2d_one_row_reduces_to_1d_plus_wall_reaction() {
        // On an n x 1 grid the 2D stiffness is h_y·S_1d plus the transverse
        // Dirichlet wall term (2·diff/h_y)·M_1d.
        let n = 5;
        let (g2, _, _) =
            assemble_obstacle_2d(n, 1, [0.0, 1.0], [0.0, 1.0], 1.0, [0.0, 0.0], 0.0).unwrap();
        let (g1, _, _) = assemble_obstacle_1d(n, [0.0, 1.0], 1.0, 0.0, 0.0).unwrap();
        let hy = 0.5;
        let expect = g1.stiffness() * hy + g1.mass() * (2.0 / hy);
        assert_relative_eq!(g2.stiffness(), &expect, epsilon = 1e-13);
    }

    #[test]
    fn upwind_system_is_an_m_matrix_on_the_feasible_cone() {
        let (g, _, op) = assemble_obstacle_1d(9, [0.0, 1.0], 1.0, 3.0, 0.0).unwrap();
        for (lambda, scale) in [(0.0, 1.0), (4.0, 0.3), (40.0, 7.0)] {
            let w = DVector::from_fn(9, |i, _| scale * (i as f64 * 0.7).sin().abs());
            let l = crate::oseen::system_matrix(&g, &op, lambda, &w).unwrap();
            for i in 0..9 {
                let mut off_sum = 0.0;
                for j in 0..9 {
                    if i != j {
                        assert!(l[(i, j)] <= 1e-14, "off-diagonal sign at ({i},{j})");
                        off_sum += l[(i, j)].abs();
                    }
                }
                assert!(l[(i, i)] > off_sum - 1e-12, "diagonal dominance at {i}");
            }
        }
    }

    #[test]
    fn lumped_projection_equals_clamp() {
        // Projecting z onto the feasible set in the H inner product solves
        // the obstacle problem with L = M; for diagonal mass this must be
        // the componentwise clamp.
        let (g, phi, _) = assemble_obstacle_1d(6, [0.0, 1.0], 1.0, 0.0, 0.0).unwrap();
        let z = DVector::from_row_slice(&[0.5, -1.0, 2.0, -0.2, 0.0, -3.0]);
        // L = M means lambda = 1 on a zero-stiffness problem; emulate by
        // brute-force on the QP  min ½ vᵀMv - vᵀMz  over v >= 0.
        let eye = DMatrix::from_diagonal(&g.mass().diagonal());
        let gq = DiscreteGelfand::new(eye.clone(), eye).unwrap();
        let oracle = brute_force_vi(
            &gq,
            &phi,
            &ConvectionOperator::zero(6),
            0.0,
            &DVector::zeros(6),
            &z,
        )
        .unwrap();
        assert_relative_eq!(oracle, phi.project(&z), epsilon = 1e-12);
    }

    #[test]
    fn presets_build_and_start_feasible() {
        for name in PRESET_NAMES {
            let (spec, cfg) = preset(name).unwrap();
            let problem = build_problem(&spec).unwrap();
            assert!(problem.phi.is_feasible(&cfg.u0), "{name}");
            cfg.validate(&problem).unwrap();
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("nope").unwrap_err();
        let msg = err.to_string();
        for name in PRESET_NAMES {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn compatible_preset_initial_state_is_stationary() {
        let (spec, cfg) = preset("lipschitz_compatible").unwrap();
        let problem = build_problem(&spec).unwrap();
        let dim = problem.gelfand.dim();
        let res = crate::oseen::vi_residual(
            &problem.gelfand,
            &problem.phi,
            &ConvectionOperator::zero(dim),
            0.0,
            &DVector::zeros(dim),
            &cfg.u0,
            &cfg.load.eval(0.0),
        )
        .unwrap();
        assert!(res <= 1e-10, "stationary residual {res:e}");
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let mut spec = ProblemSpec {
            kind: ProblemKind::ObstacleCd1d,
            resolution: vec![2],
            domain: vec![],
            convection: vec![],
            diffusion: 1.0,
            obstacle_level: 0.0,
            friction_weights: [0.0, 0.0],
            reaction: 0.0,
        };
        assert!(spec.validate().is_err());
        spec.resolution = vec![5];
        spec.diffusion = 0.0;
        assert!(spec.validate().is_err());
        spec.diffusion = 1.0;
        assert!(spec.validate().is_ok());
    }
}
