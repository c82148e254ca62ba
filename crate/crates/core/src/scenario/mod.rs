//! Scenario files, the builtin library, runs, equation printing and output.
//!
//! A scenario is a flat `key = value` text file; see [`format`] for the
//! grammar. [`run`] integrates one scenario and returns the sampled
//! trajectory together with a [`DiagnosticsReport`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::DerivativeConvention;
use crate::integrate::{DynamicsError, Method};

mod builtins;
mod derive;
mod format;
mod model;
mod run;

pub use builtins::{builtin, central_force_lagrangian_text, BUILTIN_NAMES};
pub use derive::derive;
pub use format::{load_scenario, parse_scenario, save_scenario, scenario_to_text};
pub use model::{substitute_constants, Engine, Model};
pub use run::{
    classify_scenario, emit, run, write_csv, write_report, DiagnosticsReport, Failure, Flag, OutputFormat,
    RunOutcome, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    Lagrangian,
    Hamiltonian,
}

impl Formalism {
    pub fn as_str(self) -> &'static str {
        match self {
            Formalism::Lagrangian => "lagrangian",
            Formalism::Hamiltonian => "hamiltonian",
        }
    }
}

impl fmt::Display for Formalism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formalism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lagrangian" => Ok(Formalism::Lagrangian),
            "hamiltonian" => Ok(Formalism::Hamiltonian),
            other => Err(format!("unknown formalism `{other}` (expected lagrangian|hamiltonian)")),
        }
    }
}

/// Coefficient texts of one constraint form `a·dz + b·dzb` (Hamiltonian) or
/// `a·dz + b·dzd` (Lagrangian).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl ConstraintSpec {
    pub fn new<S: Into<String>>(a: impl IntoIterator<Item = S>, b: impl IntoIterator<Item = S>) -> Self {
        Self {
            a: a.into_iter().map(Into::into).collect(),
            b: b.into_iter().map(Into::into).collect(),
        }
    }
}

/// Initial data as real and `j`-parts. `xd`/`yd` are required for the
/// Lagrangian formalism; for the Hamiltonian one they bind velocity slots
/// appearing in `H` and may be empty. `xbar`/`ybar` default to conjugates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xd: Vec<f64>,
    pub yd: Vec<f64>,
    pub xbar: Option<Vec<f64>>,
    pub ybar: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: 1e-3,
            steps: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub path: Option<String>,
    /// A CSV row is written for every step index divisible by `every`.
    pub every: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { path: None, every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub formalism: Formalism,
    pub dimension: usize,
    /// `L` or `H` in the expression grammar, before constant substitution.
    pub function_text: String,
    pub convention: DerivativeConvention,
    pub constants: BTreeMap<String, f64>,
    pub constraints: Vec<ConstraintSpec>,
    pub initial: InitialData,
    pub integrator: IntegratorSettings,
    pub output: OutputSettings,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid `{key}`: {reason}")]
    Validation { key: String, reason: String },
    #[error("unknown scenario `{0}` (known: {known})", known = BUILTIN_NAMES.join(", "))]
    UnknownScenario(String),
    #[error("numerical failure at step {step}: {source}")]
    Numerical {
        step: usize,
        #[source]
        source: DynamicsError,
    },
    #[error("domain error at step {step} (t = {t}): {message}")]
    Domain { step: usize, t: f64, message: String },
}

impl ScenarioError {
    pub(crate) fn validation(key: impl Into<String>, reason: impl fmt::Display) -> Self {
        ScenarioError::Validation {
            key: key.into(),
            reason: reason.to_string(),
        }
    }

    /// Process exit code: 2 validation, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Validation { .. } | ScenarioError::UnknownScenario(_) => 2,
            ScenarioError::Numerical { .. } | ScenarioError::Domain { .. } => 3,
            ScenarioError::Io { .. } => 4,
        }
    }
}

impl ScenarioConfig {
    /// Check every invariant that does not need the expression parser.
    pub fn validate_shape(&self) -> Result<(), ScenarioError> {
        let m = self.dimension;
        if m == 0 {
            return Err(ScenarioError::validation("dimension", "must be at least 1"));
        }
        if self.name.trim().is_empty() || self.name.contains(['\n', '=', '#']) {
            return Err(ScenarioError::validation("name", "must be a non-empty single token"));
        }
        if self.function_text.trim().is_empty() {
            return Err(ScenarioError::validation("function_text", "must not be empty"));
        }
        let len_check = |key: &str, v: &[f64]| {
            if v.len() != m {
                Err(ScenarioError::validation(
                    key,
                    format!("has {} entries, dimension is {m}", v.len()),
                ))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(ScenarioError::validation(key, "entries must be finite"))
            } else {
                Ok(())
            }
        };
        len_check("initial.x", &self.initial.x)?;
        len_check("initial.y", &self.initial.y)?;
        match self.formalism {
            Formalism::Lagrangian => {
                len_check("initial.xd", &self.initial.xd)?;
                len_check("initial.yd", &self.initial.yd)?;
                for (key, v) in [("initial.xbar", &self.initial.xbar), ("initial.ybar", &self.initial.ybar)] {
                    if v.is_some() {
                        return Err(ScenarioError::validation(key, "only allowed for the hamiltonian formalism"));
                    }
                }
            }
            Formalism::Hamiltonian => {
                for (key, v) in [("initial.xd", &self.initial.xd), ("initial.yd", &self.initial.yd)] {
                    if !v.is_empty() {
                        len_check(key, v)?;
                    }
                }
                if self.initial.xbar.is_some() != self.initial.ybar.is_some() {
                    return Err(ScenarioError::validation(
                        "initial.xbar",
                        "initial.xbar and initial.ybar must be given together",
                    ));
                }
                if let (Some(xb), Some(yb)) = (&self.initial.xbar, &self.initial.ybar) {
                    len_check("initial.xbar", xb)?;
                    len_check("initial.ybar", yb)?;
                }
            }
        }
        if !(self.integrator.dt > 0.0 && self.integrator.dt.is_finite()) {
            return Err(ScenarioError::validation("integrator.dt", "must be a positive finite number"));
        }
        if self.integrator.steps == 0 {
            return Err(ScenarioError::validation("integrator.steps", "must be at least 1"));
        }
        if self.output.every == 0 {
            return Err(ScenarioError::validation("output.every", "must be at least 1"));
        }
        if self.constraints.len() > 2 * m {
            return Err(ScenarioError::validation(
                "constraints",
                format!("{} constraints exceed 2m = {}", self.constraints.len(), 2 * m),
            ));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            for (part, v) in [("a", &c.a), ("b", &c.b)] {
                if v.len() != m {
                    return Err(ScenarioError::validation(
                        format!("constraints.{}.{part}", k + 1),
                        format!("has {} entries, dimension is {m}", v.len()),
                    ));
                }
            }
        }
        for (name, value) in &self.constants {
            model::check_constant_name(name)?;
            if !value.is_finite() {
                return Err(ScenarioError::validation(format!("constants.{name}"), "must be finite"));
            }
        }
        Ok(())
    }

    /// Full validation: shape plus parsing of every expression.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        Model::build(self).map(|_| ())
    }
}
