//! Turning a validated config into an engine and an initial state.

use std::collections::BTreeMap;

use crate::constraints::{ConstraintFlavor, ConstraintForm};
use crate::coords::{parse_coordinate, Slot};
use crate::expr::{parse_expression, Expr, EvalEnvironment};
use crate::hamiltonian::{HamiltonianState, HamiltonianSystem};
use crate::lagrangian::{LagrangianState, LagrangianSystem};
use crate::para::ParaNumber;

use super::{Formalism, ScenarioConfig, ScenarioError};

const RESERVED: &[&str] = &["J", "sqrt", "exp", "log", "conj"];

pub(crate) fn check_constant_name(name: &str) -> Result<(), ScenarioError> {
    let key = format!("constants.{name}");
    let mut chars = name.chars();
    let ident = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ident {
        return Err(ScenarioError::validation(key, "constant names must be identifiers"));
    }
    if RESERVED.contains(&name) {
        return Err(ScenarioError::validation(key, "collides with a reserved word"));
    }
    if parse_coordinate(name).is_some() {
        return Err(ScenarioError::validation(key, "collides with a coordinate name"));
    }
    Ok(())
}

/// Replace every identifier token naming a constant by its value. Negative
/// values are parenthesized except directly after `^`, where the grammar
/// takes a signed integer literal.
pub fn substitute_constants(text: &str, constants: &BTreeMap<String, f64>) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut last_sig: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_digit() || c == '.' {
            // Numbers may carry an exponent such as `1e-3`; copy them whole so
            // the `e` is never read as an identifier.
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '.') {
                let exp = matches!(chars[j], 'e' | 'E');
                j += 1;
                if exp && j < chars.len() && matches!(chars[j], '+' | '-') {
                    j += 1;
                }
            }
            out.extend(&chars[i..j]);
            last_sig = Some('0');
            i = j;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            match constants.get(&word) {
                Some(v) if *v < 0.0 && last_sig != Some('^') => out.push_str(&format!("({v})")),
                Some(v) => out.push_str(&v.to_string()),
                None => out.push_str(&word),
            }
            last_sig = Some('a');
            i = j;
        } else {
            if !c.is_whitespace() {
                last_sig = Some(c);
            }
            out.push(c);
            i += 1;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub enum Engine {
    Lagrangian(LagrangianSystem),
    Hamiltonian(HamiltonianSystem),
}

/// A config with every expression parsed and the engine constructed.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ScenarioConfig,
    pub function: Expr,
    pub constraints: Vec<ConstraintForm>,
    pub engine: Engine,
}

fn para(x: &[f64], y: &[f64]) -> Vec<ParaNumber> {
    x.iter().zip(y).map(|(&a, &b)| ParaNumber::new(a, b)).collect()
}

fn parse_with(text: &str, config: &ScenarioConfig, key: &str) -> Result<Expr, ScenarioError> {
    parse_expression(&substitute_constants(text, &config.constants))
        .map_err(|e| ScenarioError::validation(key, e))
}

impl Model {
    pub fn build(config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        config.validate_shape()?;
        let m = config.dimension;
        let function = parse_with(&config.function_text, config, "function_text")?;
        let flavor = match config.formalism {
            Formalism::Lagrangian => ConstraintFlavor::Lagrangian,
            Formalism::Hamiltonian => ConstraintFlavor::Hamiltonian,
        };
        let mut constraints = Vec::with_capacity(config.constraints.len());
        for (k, spec) in config.constraints.iter().enumerate() {
            let parse_all = |part: &str, texts: &[String]| {
                texts
                    .iter()
                    .map(|t| parse_with(t, config, &format!("constraints.{}.{part}", k + 1)))
                    .collect::<Result<Vec<_>, _>>()
            };
            let a = parse_all("a", &spec.a)?;
            let b = parse_all("b", &spec.b)?;
            let form = ConstraintForm::new(a, b, flavor)
                .map_err(|e| ScenarioError::validation(format!("constraints.{}", k + 1), e))?;
            constraints.push(form);
        }
        let invalid = |e| ScenarioError::validation("function_text", e);
        let engine = match config.formalism {
            Formalism::Lagrangian => Engine::Lagrangian(
                LagrangianSystem::new(m, function.clone(), constraints.clone(), config.convention).map_err(invalid)?,
            ),
            Formalism::Hamiltonian => Engine::Hamiltonian(
                HamiltonianSystem::with_fixed(
                    m,
                    function.clone(),
                    constraints.clone(),
                    config.convention,
                    velocity_bindings(config),
                )
                .map_err(invalid)?,
            ),
        };
        Ok(Self {
            config: config.clone(),
            function,
            constraints,
            engine,
        })
    }

    pub fn dim(&self) -> usize {
        self.config.dimension
    }

    pub fn initial_hamiltonian(&self) -> HamiltonianState {
        let init = &self.config.initial;
        let z = para(&init.x, &init.y);
        match (&init.xbar, &init.ybar) {
            (Some(xb), Some(yb)) => HamiltonianState::new(0.0, z, para(xb, yb)),
            _ => HamiltonianState::conjugate(0.0, z),
        }
    }

    pub fn initial_lagrangian(&self) -> LagrangianState {
        let init = &self.config.initial;
        LagrangianState::conjugate(0.0, para(&init.x, &init.y), para(&init.xd, &init.yd))
    }

    /// Environment for evaluating scenario expressions at a Hamiltonian
    /// state, including the fixed velocity bindings.
    pub fn hamiltonian_environment(&self, state: &HamiltonianState) -> EvalEnvironment {
        match &self.engine {
            Engine::Hamiltonian(sys) => sys.environment(state),
            Engine::Lagrangian(_) => panic!("not a hamiltonian scenario"),
        }
    }
}

/// `zd_i`, `zdb_i` bound from `initial.xd`/`initial.yd` (zero when absent).
fn velocity_bindings(config: &ScenarioConfig) -> Vec<(String, ParaNumber)> {
    let m = config.dimension;
    let init = &config.initial;
    (0..m)
        .flat_map(|i| {
            let v = ParaNumber::new(
                init.xd.get(i).copied().unwrap_or(0.0),
                init.yd.get(i).copied().unwrap_or(0.0),
            );
            let slot = Slot::velocity(i + 1);
            [(slot.z_name(), v), (slot.zbar_name(), v.conj())]
        })
        .collect()
}
