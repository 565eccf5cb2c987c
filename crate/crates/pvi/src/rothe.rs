//! Semi-implicit time stepping and the discrete existence horizon.
//!
//! One step of the scheme: given the previous state `u_prev`, find a
//! feasible `u` with
//!
//! ```text
//! ((u - u_prev)/Δt, v - u) + a(u, v - u) + <B(u_prev, u), v - u> + φ(v) - φ(u)
//!     >= (f_n, v - u)        for all v,
//! ```
//!
//! where `f_n` is the exact mean of the load over the step. The convection
//! velocity is frozen at the previous level; everything else is implicit.
//! Each step is a stationary Oseen solve with `λ = 1/Δt`, frozen velocity
//! `u_prev` and H-load `f_n + u_prev/Δt`.
//!
//! The module also carries the closed horizon formulas derived from the a
//! priori estimate: the load budget constant `β`, the guaranteed existence
//! horizon `T*`, and the admissible step bound `Δt_max`. Runs with
//! `enforce_admissibility` clip the horizon to `min(T*, T)` and reject steps
//! above `Δt_max`; exploration runs cover the requested horizon while the
//! guaranteed values are still computed and recorded on the trajectory.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::constants::ConstantsLedger;
use crate::load::Load;
use crate::oseen::{default_max_sweeps, solve_stationary_vi};
use crate::problems::Problem;
use crate::{Error, Result};

/// Configuration of one time-stepping run.
#[derive(Debug, Clone)]
pub struct RotheConfig {
    /// Time increment.
    pub dt: f64,
    /// Requested horizon.
    pub t_end: f64,
    /// Initial state; must be feasible.
    pub u0: DVector<f64>,
    pub load: Load,
    /// Clip the horizon to `min(T*, T)` and reject `dt > Δt_max`.
    pub enforce_admissibility: bool,
    /// Natural-map residual tolerance of the per-step solves.
    pub solver_tol: f64,
    /// Sweep budget per step; `None` uses `50·dim`.
    pub max_sweeps: Option<usize>,
}

impl RotheConfig {
    pub fn new(dt: f64, t_end: f64, u0: DVector<f64>, load: Load) -> Self {
        RotheConfig {
            dt,
            t_end,
            u0,
            load,
            enforce_admissibility: false,
            solver_tol: 1e-10,
            max_sweeps: None,
        }
    }

    pub fn validate(&self, problem: &Problem) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.dt > self.t_end {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds the horizon T = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must be positive, got {}",
                self.solver_tol
            )));
        }
        if self.u0.len() != problem.gelfand.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.gelfand.dim(),
                got: self.u0.len(),
            });
        }
        self.load.validate(problem.gelfand.dim())?;
        if !problem.phi.is_feasible(&self.u0) {
            return Err(Error::Infeasible(
                "initial state lies outside the effective domain".into(),
            ));
        }
        Ok(())
    }
}

/// Per-step ledger entry of a trajectory.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub norm_h: f64,
    pub norm_v: f64,
    pub norm_w: f64,
    pub phi: f64,
    /// `‖(u^n - u^{n-1})/Δt‖_H`.
    pub delta_h: f64,
    /// Certified natural-map residual of the step's stationary solve.
    pub residual: f64,
    pub sweeps: usize,
    /// Step-averaged load.
    pub f_n: DVector<f64>,
    pub f_h_norm: f64,
}

/// Norm data of the initial state.
#[derive(Debug, Clone, Copy)]
pub struct InitialRecord {
    pub norm_h: f64,
    pub norm_v: f64,
    pub norm_w: f64,
    pub phi: f64,
}

/// A completed run: states `u^0..u^N`, per-step records and the horizon
/// constants computed before stepping.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub dt: f64,
    pub initial: InitialRecord,
    pub records: Vec<StepRecord>,
    /// Energy offset `‖u0‖_V² + 2φ(u0) + C_phi3/2`.
    pub e0: f64,
    /// Squared load budget `‖f‖²_{L²(0,T;H)}` used for `β`.
    pub load_l2_sq: f64,
    pub beta: f64,
    pub t_star: f64,
    pub dt_max: f64,
    /// Uniform V-bound `2^(1+1/θ2)·(E0 + β)` on `‖u^n‖_V²`.
    pub v_bound_sq: f64,
    /// Worst slack of the V-bound along the run (negative means violated;
    /// recorded, never fatal).
    pub v_bound_worst_slack: f64,
    pub v_bound_violations: usize,
}

impl Trajectory {
    pub fn n_steps(&self) -> usize {
        self.records.len()
    }

    /// End of the covered time interval, `N·Δt`.
    pub fn covered(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn max_delta_h(&self) -> f64 {
        self.records.iter().map(|r| r.delta_h).fold(0.0, f64::max)
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, DVector::len)
    }
}

/// Mean of the load over step `n`, i.e. over `((n-1)Δt, nΔt]`.
pub fn average_load(load: &Load, n: usize, dt: f64) -> DVector<f64> {
    assert!(n >= 1, "steps are 1-based");
    load.average((n - 1) as f64 * dt, n as f64 * dt)
}

/// Smallest `β > 0` with `4M'(E0 + β)^θ2 · F <= β^(θ2+1)`, the load budget
/// constant of the horizon formula. `F = 0` returns the limit value 0.
pub fn compute_beta(e0: f64, f_l2_sq: f64, theta2: f64, m_prime: f64) -> f64 {
    assert!(e0 >= 0.0 && f_l2_sq >= 0.0 && theta2 >= 1.0 && m_prime >= 0.0);
    if f_l2_sq == 0.0 || m_prime == 0.0 {
        return 0.0;
    }
    // g(β) = β - 4M'·F·(1 + E0/β)^θ2 is strictly increasing with a single
    // root, which coincides with the root of the defining polynomial.
    let g = |beta: f64| beta - 4.0 * m_prime * f_l2_sq * (1.0 + e0 / beta).powf(theta2);
    let mut hi = 1.0;
    let mut guard = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 4200, "beta bisection failed to bracket");
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Guaranteed existence horizon
/// `T* = min{ [8M'(E0 + β)^θ2 · θ2]^{-1}, T }`.
pub fn compute_t_star(e0: f64, beta: f64, theta2: f64, m_prime: f64, t_end: f64) -> f64 {
    let denom = 8.0 * m_prime * (e0 + beta).powf(theta2) * theta2;
    if denom <= 0.0 {
        // Zero data: the formula degenerates and the whole requested
        // interval is covered.
        return t_end;
    }
    (1.0 / denom).min(t_end)
}

/// Admissible step bound
/// `Δt_max = 1 / ( C_{θ1,1/4}·2^θ1·(2^(1+1/θ2)(E0+β))^θ1 + 1/2 )`.
pub fn admissible_dt_bound(ledger: &ConstantsLedger, e0: f64, beta: f64) -> f64 {
    let theta1 = ledger.theta1.value;
    let c1 = ledger.young_h1(0.25).expect("eps > 0");
    let vb = v_bound_sq(ledger, e0, beta);
    1.0 / (c1 * 2.0f64.powf(theta1) * vb.powf(theta1) + 0.5)
}

/// The uniform V-bound `2^(1+1/θ2)·(E0 + β)` on `‖u^n‖_V²`.
pub fn v_bound_sq(ledger: &ConstantsLedger, e0: f64, beta: f64) -> f64 {
    2.0f64.powf(1.0 + 1.0 / ledger.theta2.value) * (e0 + beta)
}

/// Energy offset `E0 = ‖u0‖_V² + 2φ(u0) + C_phi3/2` of a run.
pub fn energy_offset(problem: &Problem, u0: &DVector<f64>) -> Result<f64> {
    let v = problem.gelfand.v_norm(u0);
    let phi0 = problem.phi.eval(u0)?;
    if !phi0.is_finite() {
        return Err(Error::Infeasible("initial state has infinite energy".into()));
    }
    Ok(v * v + 2.0 * phi0 + 0.5 * problem.ledger.c_phi3())
}

fn ceil_steps(ratio: f64) -> usize {
    let rounded = ratio.round();
    let n = if (ratio - rounded).abs() <= 1e-9 * ratio.abs().max(1.0) {
        rounded
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

/// Squared L²(0,T;H) load budget: the larger of the step-sum
/// `Σ_n ‖f^n‖_H² Δt` and the quadrature value of the continuous integral.
pub fn load_budget_sq(problem: &Problem, load: &Load, t_end: f64, dt: f64) -> f64 {
    let g = &problem.gelfand;
    let mut step_sum = 0.0;
    let mut a = 0.0;
    while a < t_end {
        let b = (a + dt).min(t_end);
        let f = load.average(a, b);
        step_sum += g.h_inner(&f, &f) * (b - a);
        a = b;
    }
    step_sum.max(load.l2h_squared(g, t_end, dt))
}

/// Runs the semi-implicit scheme.
///
/// Each step calls the stationary solver with `λ = 1/Δt`, frozen velocity
/// `u^{n-1}` and H-load `f^n + u^{n-1}/Δt`, warm-started at `u^{n-1}`. A
/// step that fails to certify aborts the run with its index.
pub fn rothe_run(problem: &Problem, cfg: &RotheConfig) -> Result<Trajectory> {
    cfg.validate(problem)?;
    let g = &problem.gelfand;
    let ledger = &problem.ledger;
    let theta2 = ledger.theta2.value;
    let m_prime = ledger.m_prime();

    let e0 = energy_offset(problem, &cfg.u0)?;
    let load_l2_sq = load_budget_sq(problem, &cfg.load, cfg.t_end, cfg.dt);
    let beta = compute_beta(e0, load_l2_sq, theta2, m_prime);
    let t_star = compute_t_star(e0, beta, theta2, m_prime, cfg.t_end);
    let dt_max = admissible_dt_bound(ledger, e0, beta);
    let vb_sq = v_bound_sq(ledger, e0, beta);

    if cfg.enforce_admissibility && cfg.dt > dt_max {
        return Err(Error::InadmissibleDt {
            dt: cfg.dt,
            dt_max,
        });
    }
    let horizon = if cfg.enforce_admissibility {
        t_star.min(cfg.t_end)
    } else {
        cfg.t_end
    };
    let n_steps = ceil_steps(horizon / cfg.dt);
    let max_sweeps = cfg.max_sweeps.unwrap_or_else(|| default_max_sweeps(g.dim()));
    let lambda = 1.0 / cfg.dt;

    let u0 = cfg.u0.clone();
    let initial = InitialRecord {
        norm_h: g.h_norm(&u0),
        norm_v: g.v_norm(&u0),
        norm_w: g.w_norm(&u0),
        phi: problem.phi.eval(&u0)?,
    };

    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(u0);
    let mut records = Vec::with_capacity(n_steps);
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0;

    for n in 1..=n_steps {
        let u_prev = states.last().expect("nonempty").clone();
        let f_n = average_load(&cfg.load, n, cfg.dt);
        let rhs = &f_n + &u_prev * lambda;
        let solve = solve_stationary_vi(
            g,
            &problem.phi,
            &problem.convection,
            lambda,
            &u_prev,
            &rhs,
            cfg.solver_tol,
            max_sweeps,
            Some(&u_prev),
        )?;
        if !solve.certified {
            return Err(Error::NotCertified {
                step: n,
                residual: solve.residual,
            });
        }
        let u = solve.u;
        let norms = g.norm_triple(&u)?;
        let slack = vb_sq - norms.v * norms.v;
        if slack < worst_slack {
            worst_slack = slack;
        }
        if slack < 0.0 {
            violations += 1;
        }
        let delta = (&u - &u_prev) * lambda;
        records.push(StepRecord {
            norm_h: norms.h,
            norm_v: norms.v,
            norm_w: norms.w,
            phi: problem.phi.eval(&u)?,
            delta_h: g.h_norm(&delta),
            residual: solve.residual,
            sweeps: solve.iterations,
            f_h_norm: g.h_norm(&f_n),
            f_n,
        });
        states.push(u);
    }

    Ok(Trajectory {
        states,
        dt: cfg.dt,
        initial,
        records,
        e0,
        load_l2_sq,
        beta,
        t_star,
        dt_max,
        v_bound_sq: vb_sq,
        v_bound_worst_slack: worst_slack,
        v_bound_violations: violations,
    })
}

/// The four interpolants of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpKind {
    /// `u^n` on `((n-1)Δt, nΔt]`.
    PcRight,
    /// `u^{n-1}` on `[(n-1)Δt, nΔt)`.
    PcLeft,
    /// Piecewise linear through the knots.
    Pl,
    /// `u^1` on `[0, Δt]`, then piecewise linear.
    PlShifted,
}

/// Evaluates an interpolant at time `t ∈ [0, N·Δt]`.
pub fn interpolant_eval(traj: &Trajectory, kind: InterpKind, t: f64) -> Result<DVector<f64>> {
    let n = traj.n_steps();
    let cover = traj.covered();
    let tol = 1e-12 * (1.0 + cover);
    if t < -tol || t > cover + tol {
        return Err(Error::OutOfRange { t, horizon: cover });
    }
    let t = t.clamp(0.0, cover);
    let dt = traj.dt;
    match kind {
        InterpKind::PcRight => {
            let idx = ((t / dt).ceil() as usize).clamp(0, n);
            Ok(traj.states[idx].clone())
        }
        InterpKind::PcLeft => {
            let idx = ((t / dt).floor() as usize).min(n.saturating_sub(1));
            Ok(traj.states[idx].clone())
        }
        InterpKind::Pl => {
            let cell = ((t / dt).floor() as usize).min(n.saturating_sub(1));
            let s = (t - cell as f64 * dt) / dt;
            Ok(&traj.states[cell] * (1.0 - s) + &traj.states[cell + 1] * s)
        }
        InterpKind::PlShifted => {
            if t <= dt {
                Ok(traj.states[1.min(n)].clone())
            } else {
                interpolant_eval(traj, InterpKind::Pl, t)
            }
        }
    }
}

/// Linear segment representation of an interpolant on an interval interior:
/// value at the left end plus slope.
fn segment(
    traj: &Trajectory,
    kind: InterpKind,
    a: f64,
    b: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    match kind {
        InterpKind::PcRight | InterpKind::PcLeft => {
            let mid = interpolant_eval(traj, kind, 0.5 * (a + b))?;
            let slope = DVector::zeros(mid.len());
            Ok((mid, slope))
        }
        InterpKind::Pl | InterpKind::PlShifted => {
            let va = interpolant_eval(traj, kind, a)?;
            let vb = interpolant_eval(traj, kind, b)?;
            let slope = (&vb - &va) / (b - a);
            Ok((va, slope))
        }
    }
}

/// L²(0, T_common; V) distance between interpolants of two trajectories,
/// integrated exactly on the union of knot intervals (the integrand is
/// piecewise quadratic in time). The two trajectories may use different
/// interpolant kinds, so the distance between two views of the *same* run
/// is also expressible.
pub fn traj_distance_l2v_mixed(
    g: &crate::gelfand::DiscreteGelfand,
    a: &Trajectory,
    kind_a: InterpKind,
    b: &Trajectory,
    kind_b: InterpKind,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let t_common = a.covered().min(b.covered());
    let mut knots: Vec<f64> = Vec::new();
    for traj in [a, b] {
        let mut k = 0.0;
        while k < t_common {
            knots.push(k);
            k += traj.dt;
        }
    }
    knots.push(t_common);
    knots.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    knots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + t_common));

    let mut acc = 0.0;
    for seg in knots.windows(2) {
        let (x0, x1) = (seg[0], seg[1]);
        let len = x1 - x0;
        if len <= 0.0 {
            continue;
        }
        let (va, sa) = segment(a, kind_a, x0, x1)?;
        let (vb, sb) = segment(b, kind_b, x0, x1)?;
        let d0 = &va - &vb;
        let d1 = &sa - &sb;
        acc += len * g.v_inner(&d0, &d0)
            + len * len * g.v_inner(&d0, &d1)
            + len * len * len / 3.0 * g.v_inner(&d1, &d1);
    }
    Ok(acc.max(0.0).sqrt())
}

/// L²(0, T_common; V) distance between the same-kind interpolants of two
/// trajectories.
pub fn traj_distance_l2v(
    g: &crate::gelfand::DiscreteGelfand,
    a: &Trajectory,
    b: &Trajectory,
    kind: InterpKind,
) -> Result<f64> {
    traj_distance_l2v_mixed(g, a, kind, b, kind)
}

/// Result of a Δt-refinement study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `d_k = ‖pl(dt_k) - pl(dt_{k+1})‖_{L²(0,T;V)}`.
    pub distances: Vec<f64>,
    /// `log2(d_k / d_{k+1})`.
    pub orders: Vec<f64>,
    /// `max_n ‖δ^n‖_H` per run (the Lipschitz diagnostic data).
    pub max_delta_h: Vec<f64>,
}

/// Runs the scheme once per step size and reports pairwise interpolant
/// distances and empirical orders. The step sizes must be at least three,
/// strictly halving.
pub fn convergence_study(
    problem: &Problem,
    base: &RotheConfig,
    dt_list: &[f64],
) -> Result<ConvergenceReport> {
    if dt_list.len() < 3 {
        return Err(Error::InvalidParameter(
            "a refinement study needs at least 3 step sizes".into(),
        ));
    }
    for pair in dt_list.windows(2) {
        if (pair[1] - 0.5 * pair[0]).abs() > 1e-9 * pair[0] {
            return Err(Error::InvalidParameter(format!(
                "step sizes must halve: {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    let mut runs = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let mut cfg = base.clone();
        cfg.dt = dt;
        runs.push(rothe_run(problem, &cfg)?);
    }
    let mut distances = Vec::new();
    for pair in runs.windows(2) {
        distances.push(traj_distance_l2v(
            &problem.gelfand,
            &pair[0],
            &pair[1],
            InterpKind::Pl,
        )?);
    }
    let orders = distances
        .windows(2)
        .map(|d| (d[0] / d[1]).log2())
        .collect();
    Ok(ConvergenceReport {
        dts: dt_list.to_vec(),
        distances,
        orders,
        max_delta_h: runs.iter().map(Trajectory::max_delta_h).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convection::ConvectionOperator;
    use crate::functional::ConvexFunctional;
    use crate::gelfand::DiscreteGelfand;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn scalar_problem(phi: ConvexFunctional) -> Problem {
        Problem {
            gelfand: DiscreteGelfand::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1))
                .unwrap(),
            phi,
            convection: ConvectionOperator::zero(1),
            ledger: ConstantsLedger::without_convection(),
        }
    }

    #[test]
    fn average_load_examples() {
        let c = Load::constant(DVector::from_element(1, 3.0));
        for n in 1..4 {
            assert_eq!(average_load(&c, n, 0.3)[0], 3.0);
        }
        let lin = Load::separable(DVector::from_element(1, 1.0), crate::load::TimeProfile::Linear);
        assert_relative_eq!(average_load(&lin, 1, 2.0)[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn beta_zero_load() {
        assert_eq!(compute_beta(3.0, 0.0, 2.0, 36.0), 0.0);
    }

    #[test]
    fn beta_quadratic_fixture() {
        // θ2 = 1, M' = 1, E0 = 1, F = 1: the root of β² - 4β - 4.
        let beta = compute_beta(1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(beta, 2.0 + 2.0 * 2.0f64.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn beta_monotone_in_load() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let e0 = 5.0 * next();
            let f = 0.1 + 4.0 * next();
            let theta2 = 1.0 + 2.0 * next();
            let mp = 0.5 + 10.0 * next();
            let b1 = compute_beta(e0, f, theta2, mp);
            let b2 = compute_beta(e0, 2.0 * f, theta2, mp);
            assert!(b2 > b1, "beta must grow with the load budget");
        }
    }

    #[test]
    fn t_star_fixture_and_degenerate_case() {
        assert_eq!(compute_t_star(1.0, 0.0, 2.0, 1.0, 10.0), 1.0 / 16.0);
        assert_eq!(compute_t_star(0.0, 0.0, 2.0, 1.0, 7.5), 7.5);
    }

    #[test]
    fn t_star_decreases_with_energy() {
        let mut e0 = 0.25;
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let t = compute_t_star(e0, 0.3, 2.0, 1.0, 1e9);
            assert!(t < last);
            last = t;
            e0 *= 2.0;
        }
    }

    #[test]
    fn admissible_dt_without_convection() {
        let ledger = ConstantsLedger::without_convection();
        assert_eq!(admissible_dt_bound(&ledger, 1.0, 0.0), 2.0);
    }

    #[test]
    fn admissible_dt_fixture() {
        // θ1 = 4, C_{θ1,1/4} = 6.75, and data with 2^(1+1/θ2)(E0+β) = 1.
        let ledger =
            ConstantsLedger::configured(4.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let bound = admissible_dt_bound(&ledger, 0.25, 0.0);
        assert_relative_eq!(bound, 1.0 / 108.5, epsilon = 1e-14);
        // Strictly decreasing in the energy offset.
        assert!(admissible_dt_bound(&ledger, 0.5, 0.0) < bound);
    }

    #[test]
    fn scalar_backward_euler_step() {
        let problem = scalar_problem(ConvexFunctional::zero(1));
        let cfg = RotheConfig::new(0.5, 0.5, DVector::from_element(1, 1.0), Load::zero(1));
        let traj = rothe_run(&problem, &cfg).unwrap();
        assert_eq!(traj.n_steps(), 1);
        assert_relative_eq!(traj.states[1][0], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_obstacle_clamp_step() {
        let problem = scalar_problem(ConvexFunctional::obstacle(DVector::zeros(1)));
        let cfg = RotheConfig::new(
            1.0,
            1.0,
            DVector::from_element(1, 1.0),
            Load::constant(DVector::from_element(1, -3.0)),
        );
        let traj = rothe_run(&problem, &cfg).unwrap();
        assert_eq!(traj.states[1][0], 0.0);
    }

    #[test]
    fn backward_euler_reduction_matches_linear_solve() {
        // φ = 0, B = 0: each step must equal (λM + S)⁻¹(M f + λ M u_prev).
        let n = 9;
        let h = 1.0 / (n as f64 + 1.0);
        let s = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 / h
            } else if i.abs_diff(j) == 1 {
                -1.0 / h
            } else {
                0.0
            }
        });
        let mass = DMatrix::from_diagonal(&DVector::from_element(n, h));
        let problem = Problem {
            gelfand: DiscreteGelfand::new(mass.clone(), s.clone()).unwrap(),
            phi: ConvexFunctional::zero(n),
            convection: ConvectionOperator::zero(n),
            ledger: ConstantsLedger::without_convection(),
        };
        let u0 = DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * h * std::f64::consts::PI).sin());
        let f = DVector::from_fn(n, |i, _| 0.3 - (i as f64) * 0.01);
        let dt = 0.05;
        let mut cfg = RotheConfig::new(dt, 0.25, u0.clone(), Load::constant(f.clone()));
        cfg.solver_tol = 1e-13;
        let traj = rothe_run(&problem, &cfg).unwrap();

        let lambda = 1.0 / dt;
        let l = &s + &mass * lambda;
        let lu = l.lu();
        let mut u_prev = u0;
        for n_step in 1..=traj.n_steps() {
            let rhs = &mass * &f + &mass * &u_prev * lambda;
            let exact = lu.solve(&rhs).unwrap();
            let err = problem.gelfand.h_norm(&(&traj.states[n_step] - &exact));
            assert!(err <= 1e-10, "step {n_step}: {err:e}");
            u_prev = exact;
        }
    }

    #[test]
    fn inadmissible_dt_is_rejected_when_enforced() {
        let problem = scalar_problem(ConvexFunctional::zero(1));
        let mut cfg = RotheConfig::new(0.5, 1.0, DVector::from_element(1, 1.0), Load::zero(1));
        cfg.enforce_admissibility = true;
        // Without convection Δt_max = 2, so dt = 0.5 is fine and the run is
        // clipped to T* instead.
        let traj = rothe_run(&problem, &cfg).unwrap();
        assert!(traj.covered() >= traj.t_star.min(cfg.t_end) - 1e-12);

        // A ledger with convection constants makes Δt_max microscopic.
        let mut problem2 = scalar_problem(ConvexFunctional::zero(1));
        problem2.ledger = ConstantsLedger::default_convective();
        let mut cfg2 = cfg.clone();
        cfg2.enforce_admissibility = true;
        let err = rothe_run(&problem2, &cfg2);
        assert!(matches!(err, Err(Error::InadmissibleDt { .. })));
    }

    fn toy_trajectory(states: Vec<DVector<f64>>, dt: f64) -> Trajectory {
        let n = states.len() - 1;
        Trajectory {
            states,
            dt,
            initial: InitialRecord {
                norm_h: 0.0,
                norm_v: 0.0,
                norm_w: 0.0,
                phi: 0.0,
            },
            records: (0..n)
                .map(|_| StepRecord {
                    norm_h: 0.0,
                    norm_v: 0.0,
                    norm_w: 0.0,
                    phi: 0.0,
                    delta_h: 0.0,
                    residual: 0.0,
                    sweeps: 0,
                    f_n: DVector::zeros(1),
                    f_h_norm: 0.0,
                })
                .collect(),
            e0: 0.0,
            load_l2_sq: 0.0,
            beta: 0.0,
            t_star: 1.0,
            dt_max: 1.0,
            v_bound_sq: 0.0,
            v_bound_worst_slack: 0.0,
            v_bound_violations: 0,
        }
    }

    #[test]
    fn interpolant_pointwise_definitions() {
        let states = vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, 3.0),
            DVector::from_element(1, 2.0),
        ];
        let traj = toy_trajectory(states, 0.5);
        // Knot values.
        for (i, expect) in [(0usize, 1.0), (1, 3.0), (2, 2.0)] {
            let v = interpolant_eval(&traj, InterpKind::Pl, i as f64 * 0.5).unwrap();
            assert_relative_eq!(v[0], expect, epsilon = 1e-14);
        }
        // Half-knot: pc_right - pc_left = u^n - u^{n-1}.
        let t = 0.75;
        let right = interpolant_eval(&traj, InterpKind::PcRight, t).unwrap();
        let left = interpolant_eval(&traj, InterpKind::PcLeft, t).unwrap();
        assert_relative_eq!(right[0] - left[0], 2.0 - 3.0, epsilon = 1e-14);
        // Shifted interpolant holds u^1 on the first cell.
        let shifted = interpolant_eval(&traj, InterpKind::PlShifted, 0.25).unwrap();
        assert_relative_eq!(shifted[0], 3.0, epsilon = 1e-14);
        let plain = interpolant_eval(&traj, InterpKind::Pl, 0.25).unwrap();
        assert_relative_eq!(plain[0], 2.0, epsilon = 1e-14);
        // Out of range errors.
        assert!(interpolant_eval(&traj, InterpKind::Pl, 1.5).is_err());
        assert!(interpolant_eval(&traj, InterpKind::Pl, -0.5).is_err());
    }

    #[test]
    fn distance_identities() {
        let g = DiscreteGelfand::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1)).unwrap();
        let a = toy_trajectory(
            vec![
                DVector::from_element(1, 1.0),
                DVector::from_element(1, 2.0),
                DVector::from_element(1, 1.5),
            ],
            0.5,
        );
        // Zero distance to itself.
        assert_relative_eq!(
            traj_distance_l2v(&g, &a, &a, InterpKind::Pl).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        // Constant trajectories: distance over [0,1] is the V-distance.
        let c1 = toy_trajectory(vec![DVector::from_element(1, 2.0); 3], 0.5);
        let c2 = toy_trajectory(vec![DVector::from_element(1, -1.0); 5], 0.25);
        assert_relative_eq!(
            traj_distance_l2v(&g, &c1, &c2, InterpKind::Pl).unwrap(),
            3.0,
            epsilon = 1e-13
        );
        // pc_right vs pl of the same trajectory: closed form
        // sqrt(Δt/3 · Σ ‖u^n - u^{n-1}‖_V²).
        let diffs_sq: f64 = (1.0f64).powi(2) + (0.5f64).powi(2);
        let expect = (0.5 / 3.0 * diffs_sq).sqrt();
        let mixed =
            traj_distance_l2v_mixed(&g, &a, InterpKind::PcRight, &a, InterpKind::Pl).unwrap();
        assert_relative_eq!(mixed, expect, epsilon = 1e-13);
    }

    #[test]
    fn determinism_of_precomputed_horizon() {
        let problem = scalar_problem(ConvexFunctional::zero(1));
        let cfg = RotheConfig::new(
            0.1,
            1.0,
            DVector::from_element(1, 0.7),
            Load::constant(DVector::from_element(1, 0.3)),
        );
        let a = rothe_run(&problem, &cfg).unwrap();
        let b = rothe_run(&problem, &cfg).unwrap();
        assert_eq!(a.beta.to_bits(), b.beta.to_bits());
        assert_eq!(a.t_star.to_bits(), b.t_star.to_bits());
        assert_eq!(a.dt_max.to_bits(), b.dt_max.to_bits());
    }
}
