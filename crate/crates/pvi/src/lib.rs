//! Semi-implicit time stepping for parabolic variational inequalities.
//!
//! The library solves evolution problems of the form
//!
//! ```text
//! (u'(t), v - u) + a(u, v - u) + <B(u, u), v - u> + phi(v) - phi(u) >= (f(t), v - u)
//! ```
//!
//! for all admissible test states `v`, where `a` is a coercive bilinear form,
//! `B` is a convective (Navier-Stokes type) bilinear operator and `phi` is a
//! convex, proper, lower-semicontinuous functional (obstacle indicator,
//! boundary friction, or zero). Time is discretized by a semi-implicit
//! backward Euler scheme: the convection velocity is frozen at the previous
//! time level, everything else is implicit, and each step reduces to a
//! stationary Oseen-type variational inequality solved by proximal
//! coordinate relaxation with a certified residual.
//!
//! Alongside the solver, [`diagnostics`] turns the discrete a priori theory
//! into executable checks: a constant-free per-step energy inequality, the
//! difference-sequence bound, the existence horizon `T*`, a Gronwall-type
//! perturbation contraction, a Lipschitz-in-time probe, and empirical
//! estimation of all constants entering the estimates.
//!
//! Module map:
//! - [`gelfand`]: the discretized space triple (mass, stiffness, W-norm).
//! - [`functional`]: the convex functional and its nodewise prox.
//! - [`convection`]: the bilinear transport operator.
//! - [`constants`]: the constants ledger and Young-inequality splittings.
//! - [`oseen`]: the stationary solver, residual certificate and oracle.
//! - [`load`]: time-dependent load descriptions and averaging.
//! - [`rothe`]: the time stepper, horizon formulas and interpolants.
//! - [`diagnostics`]: executable checks and constant estimation.
//! - [`problems`]: shipped problem assemblies and named presets.

pub mod constants;
pub mod convection;
pub mod diagnostics;
pub mod functional;
pub mod gelfand;
mod guide;
pub mod load;
pub mod oseen;
pub mod problems;
pub mod rothe;

pub use constants::{Constant, ConstantsLedger, Provenance};
pub use convection::ConvectionOperator;
pub use diagnostics::CheckReport;
pub use functional::ConvexFunctional;
pub use gelfand::{DiscreteGelfand, Norms};
pub use load::{Load, TimeProfile};
pub use oseen::StationarySolve;
pub use problems::{Problem, ProblemKind, ProblemSpec};
pub use rothe::{ConvergenceReport, InterpKind, RotheConfig, Trajectory};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("diagonal not positive at index {index}; refine mesh or increase lambda")]
    NonpositiveDiagonal { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("unknown preset '{name}'; known presets: {known}")]
    UnknownPreset { name: String, known: String },
    #[error("stationary solve not certified at step {step} (residual {residual:e} > tol)")]
    NotCertified { step: usize, residual: f64 },
    #[error("time step {dt} exceeds the admissible bound {dt_max}")]
    InadmissibleDt { dt: f64, dt_max: f64 },
    #[error("no active-set pattern passes the optimality checks; check the assembly or increase lambda")]
    NoKktPattern,
    #[error("time {t} outside the covered interval [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("infeasible state: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
