//! Time-dependent load descriptions.
//!
//! Three shapes cover the shipped problems: a constant-in-time vector, a
//! separable product of a spatial vector with a named temporal profile, and
//! a time-stamped table with piecewise-constant-in-time semantics. Step
//! averages are exact for tabulated loads and use 5-point Gauss-Legendre
//! quadrature per step for the smooth profiles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::gelfand::DiscreteGelfand;
use crate::{Error, Result};

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Integrates a scalar function over `[a, b]` by 5-point Gauss-Legendre.
pub(crate) fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(&x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Named temporal profiles for separable loads.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TimeProfile {
    /// `t ↦ 1`.
    Const,
    /// `t ↦ t`.
    Linear,
    /// `t ↦ sin(ω t)`.
    Sin { omega: f64 },
    /// Piecewise-constant table: value `values[i]` on `[times[i], times[i+1])`,
    /// the last value extending beyond the final stamp.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Const => 1.0,
            TimeProfile::Linear => t,
            TimeProfile::Sin { omega } => (omega * t).sin(),
            TimeProfile::Table { times, values } => {
                let k = times.iter().take_while(|&&s| s <= t).count();
                if k == 0 {
                    values.first().copied().unwrap_or(0.0)
                } else {
                    values[(k - 1).min(values.len() - 1)]
                }
            }
        }
    }

    /// Exact mean over `[a, b]` for piecewise-constant tables; Gauss-Legendre
    /// mean otherwise (exact for the polynomial profiles).
    fn mean(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return self.eval(a);
        }
        match self {
            TimeProfile::Table { times, .. } => {
                // Split on the stamps inside (a, b) and add exact segment areas.
                let mut cuts: Vec<f64> = vec![a];
                cuts.extend(times.iter().copied().filter(|&s| s > a && s < b));
                cuts.push(b);
                let area: f64 = cuts
                    .windows(2)
                    .map(|seg| self.eval(0.5 * (seg[0] + seg[1])) * (seg[1] - seg[0]))
                    .sum();
                area / (b - a)
            }
            _ => gauss5(|t| self.eval(t), a, b) / (b - a),
        }
    }

    fn is_table(&self) -> bool {
        matches!(self, TimeProfile::Table { .. })
    }
}

/// A time-dependent H-load `f : [0, T] → H`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Load {
    Constant { value: Vec<f64> },
    Separable { spatial: Vec<f64>, profile: TimeProfile },
    Tabulated { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Load {
    pub fn zero(dim: usize) -> Self {
        Load::Constant {
            value: vec![0.0; dim],
        }
    }

    pub fn constant(v: DVector<f64>) -> Self {
        Load::Constant {
            value: v.iter().copied().collect(),
        }
    }

    pub fn separable(spatial: DVector<f64>, profile: TimeProfile) -> Self {
        Load::Separable {
            spatial: spatial.iter().copied().collect(),
            profile,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Load::Constant { value } => value.len(),
            Load::Separable { spatial, .. } => spatial.len(),
            Load::Tabulated { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        if let Load::Tabulated { times, values } = self {
            if times.len() != values.len() || times.is_empty() {
                return Err(Error::InvalidSpec(
                    "tabulated load needs matching, nonempty stamps and values".into(),
                ));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidSpec(
                    "tabulated load stamps must be strictly increasing".into(),
                ));
            }
            if values.iter().any(|v| v.len() != dim) {
                return Err(Error::InvalidSpec("tabulated load values ragged".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        match self {
            Load::Constant { value } => DVector::from_row_slice(value),
            Load::Separable { spatial, profile } => {
                DVector::from_row_slice(spatial) * profile.eval(t)
            }
            Load::Tabulated { times, values } => {
                let k = times.iter().take_while(|&&s| s <= t).count();
                let idx = if k == 0 { 0 } else { k - 1 };
                DVector::from_row_slice(&values[idx])
            }
        }
    }

    /// Mean of the load over `[a, b]`.
    pub fn average(&self, a: f64, b: f64) -> DVector<f64> {
        match self {
            Load::Constant { value } => DVector::from_row_slice(value),
            Load::Separable { spatial, profile } => {
                DVector::from_row_slice(spatial) * profile.mean(a, b)
            }
            Load::Tabulated { times, values } => {
                if b <= a {
                    return self.eval(a);
                }
                let dim = values[0].len();
                let mut cuts: Vec<f64> = vec![a];
                cuts.extend(times.iter().copied().filter(|&s| s > a && s < b));
                cuts.push(b);
                let mut acc = DVector::zeros(dim);
                for seg in cuts.windows(2) {
                    acc += self.eval(0.5 * (seg[0] + seg[1])) * (seg[1] - seg[0]);
                }
                acc / (b - a)
            }
        }
    }

    /// `∫_0^T ‖f(t)‖_H² dt`, by exact segment sums for tables and panel-wise
    /// Gauss-Legendre otherwise (`panel` is the panel width, typically the
    /// time step).
    pub fn l2h_squared(&self, g: &DiscreteGelfand, t_end: f64, panel: f64) -> f64 {
        let h_sq = |t: f64| {
            let f = self.eval(t);
            g.h_inner(&f, &f)
        };
        match self {
            Load::Constant { .. } => h_sq(0.0) * t_end,
            Load::Tabulated { times, .. } => {
                let mut cuts: Vec<f64> = vec![0.0];
                cuts.extend(times.iter().copied().filter(|&s| s > 0.0 && s < t_end));
                cuts.push(t_end);
                cuts.windows(2)
                    .map(|seg| h_sq(0.5 * (seg[0] + seg[1])) * (seg[1] - seg[0]))
                    .sum()
            }
            Load::Separable { .. } => {
                let mut acc = 0.0;
                let mut a = 0.0;
                while a < t_end {
                    let b = (a + panel).min(t_end);
                    acc += gauss5(h_sq, a, b);
                    a = b;
                }
                acc
            }
        }
    }

    /// Whether the load is differentiable in time (the requirement of the
    /// Lipschitz diagnostic).
    pub fn is_smooth_in_time(&self) -> bool {
        match self {
            Load::Constant { .. } => true,
            Load::Separable { profile, .. } => !profile.is_table(),
            Load::Tabulated { .. } => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_load_averages_to_itself() {
        let f = Load::constant(DVector::from_row_slice(&[2.0, -1.0]));
        for (a, b) in [(0.0, 1.0), (3.0, 3.5)] {
            assert_eq!(f.average(a, b), DVector::from_row_slice(&[2.0, -1.0]));
        }
    }

    #[test]
    fn linear_profile_average_is_midpoint() {
        let f = Load::separable(DVector::from_element(1, 1.0), TimeProfile::Linear);
        assert_relative_eq!(f.average(0.0, 2.0)[0], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss5_integrates_quadratic_exactly() {
        // Mean of t² over (0, 1] is 1/3.
        let mean = gauss5(|t| t * t, 0.0, 1.0);
        assert_relative_eq!(mean, 1.0 / 3.0, epsilon = 1e-14);
        // And a quartic, still inside the exactness degree.
        assert_relative_eq!(gauss5(|t| t.powi(4), 0.0, 2.0), 32.0 / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn sin_profile_average_matches_antiderivative() {
        let omega = 3.0;
        let f = Load::separable(DVector::from_element(1, 1.0), TimeProfile::Sin { omega });
        let (a, b) = (0.2, 0.9);
        let exact = ((omega * a).cos() - (omega * b).cos()) / (omega * (b - a));
        assert_relative_eq!(f.average(a, b)[0], exact, epsilon = 1e-8);
    }

    #[test]
    fn table_average_is_exact_across_stamps() {
        let f = Load::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![vec![1.0], vec![3.0]],
        };
        // Mean over (0.5, 1.5]: half at 1, half at 3.
        assert_relative_eq!(f.average(0.5, 1.5)[0], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn l2h_squared_constant() {
        let g = DiscreteGelfand::new(
            nalgebra::DMatrix::identity(1, 1),
            nalgebra::DMatrix::identity(1, 1),
        )
        .unwrap();
        let f = Load::constant(DVector::from_element(1, 2.0));
        assert_relative_eq!(f.l2h_squared(&g, 3.0, 0.5), 12.0, max_relative = 1e-13);
    }

    #[test]
    fn tabulated_validation() {
        let bad = Load::Tabulated {
            times: vec![0.0, 0.0],
            values: vec![vec![1.0], vec![2.0]],
        };
        assert!(bad.validate(1).is_err());
    }
}
