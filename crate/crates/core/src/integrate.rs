//! Fixed-step integrators shared by both engines, and their error type.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::para::{NullComponent, ParaNumber};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown method `{other}` (expected euler|rk4)")),
        }
    }
}

/// Which right-hand-side evaluation of a step failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Euler,
    Rk4(u8),
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Euler => f.write_str("euler stage"),
            Stage::Rk4(k) => write!(f, "rk4 stage {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] ExprError),
    #[error("mass block is singular on the {sheet} sheet")]
    SingularMass { sheet: NullComponent },
    /// `measure` is the range residual of the multiplier system, or the smallest
    /// relative singular value of a singular saddle matrix.
    #[error("inconsistent constraints on the {sheet} sheet (measure {measure:e})")]
    InconsistentConstraint { sheet: NullComponent, measure: f64 },
    #[error("state became non-finite")]
    NonFinite,
    #[error("{stage} at t = {t}: {source}")]
    AtStage {
        stage: Stage,
        t: f64,
        source: Box<DynamicsError>,
    },
}

impl DynamicsError {
    /// The underlying error with stage tags removed.
    pub fn root(&self) -> &DynamicsError {
        match self {
            DynamicsError::AtStage { source, .. } => source.root(),
            other => other,
        }
    }
}

fn axpy(y: &[ParaNumber], h: f64, k: &[ParaNumber]) -> Vec<ParaNumber> {
    y.iter().zip(k).map(|(a, b)| *a + b.scale(h)).collect()
}

/// One step of `y' = f(t, y)`.
pub fn advance<F>(t: f64, y: &[ParaNumber], dt: f64, method: Method, mut f: F) -> Result<Vec<ParaNumber>, DynamicsError>
where
    F: FnMut(f64, &[ParaNumber]) -> Result<Vec<ParaNumber>, DynamicsError>,
{
    let mut eval = |stage: Stage, t: f64, y: &[ParaNumber]| {
        f(t, y).map_err(|e| DynamicsError::AtStage {
            stage,
            t,
            source: Box::new(e),
        })
    };
    let out = match method {
        Method::Euler => axpy(y, dt, &eval(Stage::Euler, t, y)?),
        Method::Rk4 => {
            let half = 0.5 * dt;
            let k1 = eval(Stage::Rk4(1), t, y)?;
            let k2 = eval(Stage::Rk4(2), t + half, &axpy(y, half, &k1))?;
            let k3 = eval(Stage::Rk4(3), t + half, &axpy(y, half, &k2))?;
            let k4 = eval(Stage::Rk4(4), t + dt, &axpy(y, dt, &k3))?;
            let sixth = dt / 6.0;
            y.iter()
                .enumerate()
                .map(|(i, &yi)| yi + (k1[i] + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i]).scale(sixth))
                .collect()
        }
    };
    if out.iter().all(|v: &ParaNumber| v.is_finite()) {
        Ok(out)
    } else {
        Err(DynamicsError::NonFinite)
    }
}
