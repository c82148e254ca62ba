//! The builtin scenario library.

use std::collections::BTreeMap;

use crate::calculus::DerivativeConvention;
use crate::integrate::Method;

use super::{
    ConstraintSpec, Formalism, InitialData, IntegratorSettings, OutputSettings, ScenarioConfig, ScenarioError,
};

pub const BUILTIN_NAMES: &[&str] = &[
    "central-force",
    "quadratic-h",
    "frozen-2constraint",
    "free-particle",
    "anholonomic-demo",
];

/// `W = √(1 − (z−z̄)²/(z+z̄)²)` as it appears in the central-force functions.
pub(crate) const CENTRAL_FORCE_W: &str = "sqrt(1 - (z1-zb1)^2/(z1+zb1)^2)";

const CENTRAL_FORCE_H: &str = "0.5*m*zd1*zdb1 + (A/alpha)*sqrt(z1*zb1)^alpha \
+ J*m*g*(z1-zb1)*sqrt(z1*zb1)/((z1+zb1)*sqrt(1 - (z1-zb1)^2/(z1+zb1)^2))";

const CENTRAL_FORCE_L: &str = "0.5*m*zd1*zdb1 - (A/alpha)*sqrt(z1*zb1)^alpha \
- J*m*g*(z1-zb1)*sqrt(z1*zb1)/((z1+zb1)*sqrt(1 - (z1-zb1)^2/(z1+zb1)^2))";

/// The central-force Lagrangian paired with the builtin Hamiltonian, before
/// constant substitution.
pub fn central_force_lagrangian_text() -> &'static str {
    CENTRAL_FORCE_L
}

fn base(name: &str, formalism: Formalism, dimension: usize, function_text: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        formalism,
        dimension,
        function_text: function_text.to_string(),
        convention: DerivativeConvention::Independent,
        constants: BTreeMap::new(),
        constraints: Vec::new(),
        initial: InitialData::default(),
        integrator: IntegratorSettings {
            method: Method::Rk4,
            dt: 1e-3,
            steps: 10_000,
        },
        output: OutputSettings::default(),
    }
}

pub fn builtin(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    let config = match name {
        "free-particle" => {
            let mut c = base(name, Formalism::Lagrangian, 1, "0.5*zd1*zdb1");
            c.initial.x = vec![0.5];
            c.initial.y = vec![0.1];
            c.initial.xd = vec![1.0];
            c.initial.yd = vec![0.0];
            c
        }
        "quadratic-h" => {
            let mut c = base(name, Formalism::Hamiltonian, 1, "z1*zb1");
            c.initial.x = vec![0.8];
            c.initial.y = vec![0.3];
            c
        }
        "frozen-2constraint" => {
            let mut c = base(name, Formalism::Hamiltonian, 1, "z1*zb1");
            c.constraints = vec![ConstraintSpec::new(["1"], ["0"]), ConstraintSpec::new(["0"], ["1"])];
            c.initial.x = vec![0.7];
            c.initial.y = vec![-0.2];
            c
        }
        "anholonomic-demo" => {
            let mut c = base(name, Formalism::Hamiltonian, 2, "0.5*(z1^2 + zb1^2 + z2^2 + zb2^2)");
            c.constraints = vec![
                ConstraintSpec::new(["0", "1"], ["-z1", "0"]),
                ConstraintSpec::new(["-zb1", "0"], ["0", "1"]),
            ];
            c.initial.x = vec![0.3, 0.2];
            c.initial.y = vec![0.1, -0.05];
            c
        }
        "central-force" => {
            let mut c = base(name, Formalism::Hamiltonian, 1, CENTRAL_FORCE_H);
            c.constants = [("m", 1.0), ("g", 9.8), ("A", 1.0), ("alpha", 2.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            c.initial.x = vec![1.0];
            c.initial.y = vec![0.2];
            c.initial.xd = vec![0.0];
            c.initial.yd = vec![0.0];
            c
        }
        other => return Err(ScenarioError::UnknownScenario(other.to_string())),
    };
    Ok(config)
}

/// Per-sheet check that `W` is defined: `|z − z̄| < |z + z̄|` on both null
/// sheets.
pub(crate) fn central_force_domain(z: crate::ParaNumber, zbar: crate::ParaNumber) -> Result<(), String> {
    let (a, b) = (z.null_split(), zbar.null_split());
    for (sheet, p, q) in [("e+", a.plus, b.plus), ("e-", a.minus, b.minus)] {
        if (p - q).abs() >= (p + q).abs() {
            return Err(format!(
                "W = {CENTRAL_FORCE_W} is undefined on the {sheet} sheet (|z - zb| = {:e} >= |z + zb| = {:e})",
                (p - q).abs(),
                (p + q).abs()
            ));
        }
    }
    Ok(())
}
