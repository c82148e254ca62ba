//! The scenario text format.
//!
//! One `key = value` pair per line; `#` starts a comment that runs to the
//! end of the line. Lists are comma-separated (the expression grammar has no
//! commas, so coefficient expressions need no quoting). Keys:
//!
//! ```text
//! name = free-particle
//! formalism = lagrangian            # or hamiltonian
//! dimension = 1
//! convention = independent          # or paper
//! function_text = 0.5*zd1*zdb1
//! constants.NAME = 1.5              # any number of these
//! constraints.1.a = 1, 0            # constraints are numbered from 1
//! constraints.1.b = 0, z1
//! initial.x = 0.5
//! initial.y = 0.1
//! initial.xd = 1                    # required for lagrangian
//! initial.yd = 0
//! initial.xbar = ...                # optional, hamiltonian only
//! initial.ybar = ...
//! integrator.method = rk4           # or euler
//! integrator.dt = 0.001
//! integrator.steps = 10000
//! output.every = 1
//! output.path = out.csv             # optional
//! ```
//!
//! [`scenario_to_text`] writes exactly this layout, with floats in their
//! shortest round-trip form, so `parse ∘ write` is the identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{
    ConstraintSpec, InitialData, IntegratorSettings, OutputSettings, ScenarioConfig, ScenarioError,
};

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config = parse_scenario(&text)?;
    config.validate()?;
    Ok(config)
}

pub fn save_scenario(config: &ScenarioConfig, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, scenario_to_text(config)).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn float_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

pub fn scenario_to_text(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: &str| {
        let _ = writeln!(s, "{k} = {v}");
    };
    line("name", &c.name);
    line("formalism", c.formalism.as_str());
    line("dimension", &c.dimension.to_string());
    line("convention", c.convention.as_str());
    line("function_text", &c.function_text);
    for (name, v) in &c.constants {
        line(&format!("constants.{name}"), &format!("{v:?}"));
    }
    for (k, spec) in c.constraints.iter().enumerate() {
        line(&format!("constraints.{}.a", k + 1), &spec.a.join(", "));
        line(&format!("constraints.{}.b", k + 1), &spec.b.join(", "));
    }
    line("initial.x", &float_list(&c.initial.x));
    line("initial.y", &float_list(&c.initial.y));
    if !c.initial.xd.is_empty() || !c.initial.yd.is_empty() {
        line("initial.xd", &float_list(&c.initial.xd));
        line("initial.yd", &float_list(&c.initial.yd));
    }
    if let Some(v) = &c.initial.xbar {
        line("initial.xbar", &float_list(v));
    }
    if let Some(v) = &c.initial.ybar {
        line("initial.ybar", &float_list(v));
    }
    line("integrator.method", c.integrator.method.as_str());
    line("integrator.dt", &format!("{:?}", c.integrator.dt));
    line("integrator.steps", &c.integrator.steps.to_string());
    line("output.every", &c.output.every.to_string());
    if let Some(p) = &c.output.path {
        line("output.path", p);
    }
    s
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ScenarioError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| ScenarioError::validation(key, format!("`{v}`: {e}")))
}

fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>, ScenarioError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_value(key, x.trim())).collect()
}

fn parse_texts(key: &str, v: &str) -> Result<Vec<String>, ScenarioError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|x| {
            let x = x.trim();
            if x.is_empty() {
                Err(ScenarioError::validation(key, "empty list entry"))
            } else {
                Ok(x.to_string())
            }
        })
        .collect()
}

/// Parse scenario text. Only the shape is checked here; expressions are
/// parsed by [`ScenarioConfig::validate`].
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ScenarioError::validation(
                format!("line {}", n + 1),
                "expected `key = value`",
            ));
        };
        let key = k.trim().to_string();
        if let Some(prev) = seen.insert(key.clone(), n + 1) {
            return Err(ScenarioError::validation(key, format!("duplicate key (first on line {prev})")));
        }
        pairs.push((key, v.trim().to_string()));
    }

    let mut name = None;
    let mut formalism = None;
    let mut dimension = None;
    let mut convention = None;
    let mut function_text = None;
    let mut constants = BTreeMap::new();
    let mut constraints: BTreeMap<usize, (Option<Vec<String>>, Option<Vec<String>>)> = BTreeMap::new();
    let mut initial = InitialData::default();
    let (mut has_x, mut has_y) = (false, false);
    let mut integrator = IntegratorSettings::default();
    let mut output = OutputSettings::default();

    for (key, v) in pairs {
        let k = key.as_str();
        match k {
            "name" => name = Some(v),
            "formalism" => formalism = Some(parse_value(k, &v)?),
            "dimension" => dimension = Some(parse_value(k, &v)?),
            "convention" => convention = Some(parse_value(k, &v)?),
            "function_text" => function_text = Some(v),
            "initial.x" => (initial.x, has_x) = (parse_floats(k, &v)?, true),
            "initial.y" => (initial.y, has_y) = (parse_floats(k, &v)?, true),
            "initial.xd" => initial.xd = parse_floats(k, &v)?,
            "initial.yd" => initial.yd = parse_floats(k, &v)?,
            "initial.xbar" => initial.xbar = Some(parse_floats(k, &v)?),
            "initial.ybar" => initial.ybar = Some(parse_floats(k, &v)?),
            "integrator.method" => integrator.method = parse_value(k, &v)?,
            "integrator.dt" => integrator.dt = parse_value(k, &v)?,
            "integrator.steps" => integrator.steps = parse_value(k, &v)?,
            "output.every" => output.every = parse_value(k, &v)?,
            "output.path" => output.path = Some(v),
            _ => {
                if let Some(cname) = k.strip_prefix("constants.") {
                    super::model::check_constant_name(cname)?;
                    constants.insert(cname.to_string(), parse_value(k, &v)?);
                } else if let Some(rest) = k.strip_prefix("constraints.") {
                    let (idx, part) = rest
                        .split_once('.')
                        .ok_or_else(|| ScenarioError::validation(k, "expected constraints.K.a or constraints.K.b"))?;
                    let idx: usize = parse_value(k, idx)?;
                    if idx == 0 {
                        return Err(ScenarioError::validation(k, "constraints are numbered from 1"));
                    }
                    let entry = constraints.entry(idx).or_default();
                    match part {
                        "a" => entry.0 = Some(parse_texts(k, &v)?),
                        "b" => entry.1 = Some(parse_texts(k, &v)?),
                        _ => return Err(ScenarioError::validation(k, "expected constraints.K.a or constraints.K.b")),
                    }
                } else {
                    return Err(ScenarioError::validation(k, "unknown key"));
                }
            }
        }
    }

    let missing = |key: &str| ScenarioError::validation(key, "missing");
    if !has_x {
        return Err(missing("initial.x"));
    }
    if !has_y {
        return Err(missing("initial.y"));
    }
    let mut specs = Vec::with_capacity(constraints.len());
    for (expected, (idx, (a, b))) in (1..).zip(constraints) {
        if idx != expected {
            return Err(ScenarioError::validation(
                format!("constraints.{expected}"),
                "constraint numbering must be contiguous from 1",
            ));
        }
        let a = a.ok_or_else(|| missing(&format!("constraints.{idx}.a")))?;
        let b = b.ok_or_else(|| missing(&format!("constraints.{idx}.b")))?;
        specs.push(ConstraintSpec { a, b });
    }

    let config = ScenarioConfig {
        name: name.ok_or_else(|| missing("name"))?,
        formalism: formalism.ok_or_else(|| missing("formalism"))?,
        dimension: dimension.ok_or_else(|| missing("dimension"))?,
        function_text: function_text.ok_or_else(|| missing("function_text"))?,
        convention: convention.unwrap_or_default(),
        constants,
        constraints: specs,
        initial,
        integrator,
        output,
    };
    config.validate_shape()?;
    Ok(config)
}
