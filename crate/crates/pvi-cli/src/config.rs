//! Run configuration: a single JSON document describing the problem, the
//! time-stepping parameters, optional ledger overrides and output paths.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use pvi::problems::{build_problem, preset};
use pvi::{Constant, Load, Problem, ProblemSpec, RotheConfig};

/// Either a named preset or an explicit problem spec.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProblemRef {
    Preset { preset: String },
    Spec(ProblemSpec),
}

/// Optional overrides of the time-stepping parameters; unset fields fall
/// back to the preset defaults (explicit specs must set them).
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct RotheOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<Load>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforce_admissibility: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
}

/// Per-constant ledger overrides; values entered here carry configured
/// provenance.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct LedgerOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_h1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_h3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_h4: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_reg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_phi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_phi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemRef,
    #[serde(default)]
    pub rothe: RotheOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerOverrides>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gronwall_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_levels: Option<usize>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Reads a config file; a missing extension falls back to `<path>.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let resolved = if path.exists() {
            path.to_path_buf()
        } else {
            let with_ext = path.with_extension("json");
            if with_ext.exists() {
                with_ext
            } else {
                bail!("config file not found: {}", path.display());
            }
        };
        let text = fs::read_to_string(&resolved)
            .with_context(|| format!("reading {}", resolved.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", resolved.display()))?;
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(200)
    }

    /// Materializes the problem and run configuration, applying overrides.
    pub fn realize(&self) -> Result<(ProblemSpec, Problem, RotheConfig)> {
        let (spec, base) = match &self.problem {
            ProblemRef::Preset { preset: name } => {
                let (spec, cfg) = preset(name)?;
                (spec, Some(cfg))
            }
            ProblemRef::Spec(spec) => (spec.clone(), None),
        };
        let mut problem = build_problem(&spec)?;
        if let Some(over) = &self.ledger {
            apply_ledger_overrides(&mut problem, over)?;
        }

        let o = &self.rothe;
        let dt = o
            .dt
            .or(base.as_ref().map(|c| c.dt))
            .ok_or_else(|| anyhow!("rothe.dt is required for explicit problem specs"))?;
        let t_end = o
            .t_end
            .or(base.as_ref().map(|c| c.t_end))
            .ok_or_else(|| anyhow!("rothe.t_end is required for explicit problem specs"))?;
        let u0 = match (&o.u0, &base) {
            (Some(v), _) => DVector::from_row_slice(v),
            (None, Some(c)) => c.u0.clone(),
            (None, None) => bail!("rothe.u0 is required for explicit problem specs"),
        };
        let load = match (&o.load, &base) {
            (Some(l), _) => l.clone(),
            (None, Some(c)) => c.load.clone(),
            (None, None) => bail!("rothe.load is required for explicit problem specs"),
        };
        let mut cfg = RotheConfig::new(dt, t_end, u0, load);
        if let Some(base) = &base {
            cfg.enforce_admissibility = base.enforce_admissibility;
            cfg.solver_tol = base.solver_tol;
            cfg.max_sweeps = base.max_sweeps;
        }
        if let Some(e) = o.enforce_admissibility {
            cfg.enforce_admissibility = e;
        }
        if let Some(t) = o.solver_tol {
            cfg.solver_tol = t;
        }
        if let Some(m) = o.max_sweeps {
            cfg.max_sweeps = Some(m);
        }
        cfg.validate(&problem)?;
        Ok((spec, problem, cfg))
    }
}

fn apply_ledger_overrides(problem: &mut Problem, over: &LedgerOverrides) -> Result<()> {
    let l = &mut problem.ledger;
    let mut set = |slot: &mut Constant, v: Option<f64>| {
        if let Some(v) = v {
            *slot = Constant::configured(v);
        }
    };
    set(&mut l.theta1, over.theta1);
    set(&mut l.theta2, over.theta2);
    set(&mut l.c_b, over.c_b);
    set(&mut l.c_h1, over.c_h1);
    set(&mut l.c_h3, over.c_h3);
    set(&mut l.c_h4, over.c_h4);
    set(&mut l.c_reg, over.c_reg);
    set(&mut l.c_phi1, over.c_phi1);
    set(&mut l.c_phi2, over.c_phi2);
    if over.m_override.is_some() {
        l.m_override = over.m_override;
    }
    l.validate()?;
    Ok(())
}
