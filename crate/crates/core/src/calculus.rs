//! Paracomplex derivative operators assembled from real partials.
//!
//! `∂/∂z = ½(∂/∂x ∓ j ∂/∂y)` and `∂/∂zb = ½(∂/∂x ± j ∂/∂y)`, with the sign
//! picked by [`DerivativeConvention`]. Under `Independent` the operators
//! reproduce the formal partials (`∂z/∂z = 1`, `∂zb/∂z = 0`); under `Paper`
//! the two are exchanged.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coords::{Part, RealCoord, Slot, Which};
use crate::expr::{diff_formal, diff_real, simplify, EvalEnvironment, Expr, ExprError};
use crate::para::ParaNumber;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeConvention {
    /// `∂/∂z = ½(∂/∂x − j ∂/∂y)` exactly as printed.
    Paper,
    /// `∂/∂z = ½(∂/∂x + j ∂/∂y)`, making `z` and `zb` independent.
    #[default]
    Independent,
}

impl DerivativeConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            DerivativeConvention::Paper => "paper",
            DerivativeConvention::Independent => "independent",
        }
    }

    /// Sign of the `j ∂/∂y` term for the requested derivative.
    fn j_sign(self, which: Which) -> f64 {
        match (self, which) {
            (DerivativeConvention::Independent, Which::Z)
            | (DerivativeConvention::Paper, Which::ZBar) => 1.0,
            _ => -1.0,
        }
    }
}

impl fmt::Display for DerivativeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DerivativeConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(DerivativeConvention::Paper),
            "independent" => Ok(DerivativeConvention::Independent),
            other => Err(format!("unknown convention `{other}` (expected paper|independent)")),
        }
    }
}

/// `∂expr/∂z_slot` or `∂expr/∂zb_slot` as a simplified tree.
///
/// Trees without `conj` are differentiated formally in the matching slot
/// member, which gives the same function with far fewer nodes; otherwise the
/// real partials are combined as above.
pub fn wirtinger_derivative(
    expr: &Expr,
    slot: Slot,
    which: Which,
    conv: DerivativeConvention,
) -> Expr {
    let member = match conv {
        DerivativeConvention::Independent => which,
        DerivativeConvention::Paper => which.flip(),
    };
    match diff_formal(expr, &slot.name(member)) {
        Some(d) => simplify(&d),
        None => real_route_derivative(expr, slot, which, conv),
    }
}

/// `½(∂/∂x ± j ∂/∂y)` built from real partials.
pub fn real_route_derivative(
    expr: &Expr,
    slot: Slot,
    which: Which,
    conv: DerivativeConvention,
) -> Expr {
    let dx = diff_real(expr, slot.real(Part::Re));
    let dy = diff_real(expr, slot.real(Part::Jm));
    let jy = Expr::scale(ParaNumber::new(0.0, conv.j_sign(which)), dy);
    simplify(&Expr::scale(ParaNumber::real(0.5), Expr::add(dx, jy)))
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("derivative {along}: {source}")]
pub struct JetError {
    pub along: String,
    #[source]
    pub source: ExprError,
}

/// Value, real gradient, and real Hessian of an expression at a point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JetValue {
    pub value: ParaNumber,
    pub grad: BTreeMap<String, ParaNumber>,
    pub hess: BTreeMap<(String, String), ParaNumber>,
}

impl JetValue {
    pub fn grad(&self, coord: RealCoord) -> Option<ParaNumber> {
        self.grad.get(&coord.name()).copied()
    }

    pub fn hess(&self, a: RealCoord, b: RealCoord) -> Option<ParaNumber> {
        self.hess.get(&(a.name(), b.name())).copied()
    }
}

/// Evaluates jets of one expression, caching each differentiated tree.
///
/// The cache sits behind a lock so one evaluator can be shared by workers.
#[derive(Debug)]
pub struct JetEvaluator {
    expr: Expr,
    first: RwLock<HashMap<RealCoord, Arc<Expr>>>,
    second: RwLock<HashMap<(RealCoord, RealCoord), Arc<Expr>>>,
}

impl JetEvaluator {
    pub fn new(expr: Expr) -> Self {
        Self {
            expr,
            first: RwLock::default(),
            second: RwLock::default(),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn first_derivative(&self, c: RealCoord) -> Arc<Expr> {
        if let Some(t) = self.first.read().expect("jet cache poisoned").get(&c) {
            return Arc::clone(t);
        }
        let tree = Arc::new(simplify(&diff_real(&self.expr, c)));
        let mut cache = self.first.write().expect("jet cache poisoned");
        Arc::clone(cache.entry(c).or_insert(tree))
    }

    /// `∂²/∂a∂b`; stored once per unordered pair.
    pub fn second_derivative(&self, a: RealCoord, b: RealCoord) -> Arc<Expr> {
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(t) = self.second.read().expect("jet cache poisoned").get(&key) {
            return Arc::clone(t);
        }
        let first = self.first_derivative(key.0);
        let tree = Arc::new(simplify(&diff_real(&first, key.1)));
        let mut cache = self.second.write().expect("jet cache poisoned");
        Arc::clone(cache.entry(key).or_insert(tree))
    }

    pub fn evaluate(
        &self,
        env: &EvalEnvironment,
        order: usize,
        coords: &[RealCoord],
    ) -> Result<JetValue, JetError> {
        assert!(order <= 2, "jets are available up to order 2");
        let value = self.expr.evaluate(env).map_err(|source| JetError {
            along: "value".into(),
            source,
        })?;
        let mut jet = JetValue {
            value,
            ..JetValue::default()
        };
        if order == 0 {
            return Ok(jet);
        }
        for &c in coords {
            let v = self.first_derivative(c).evaluate(env).map_err(|source| JetError {
                along: format!("d/d{c}"),
                source,
            })?;
            jet.grad.insert(c.name(), v);
        }
        if order == 2 {
            for &a in coords {
                for &b in coords {
                    let v = self
                        .second_derivative(a, b)
                        .evaluate(env)
                        .map_err(|source| JetError {
                            along: format!("d2/d{a}d{b}"),
                            source,
                        })?;
                    jet.hess.insert((a.name(), b.name()), v);
                }
            }
        }
        Ok(jet)
    }
}

pub fn jet_evaluate(
    expr: &Expr,
    env: &EvalEnvironment,
    order: usize,
    coords: &[RealCoord],
) -> Result<JetValue, JetError> {
    JetEvaluator::new(expr.clone()).evaluate(env, order, coords)
}

/// Environment with the real coordinate `coord` shifted by `h`
/// (both members of its slot move consistently).
pub fn shifted(env: &EvalEnvironment, coord: RealCoord, h: f64) -> EvalEnvironment {
    let (dz, dzb) = match coord.part {
        Part::Re => (ParaNumber::real(h), ParaNumber::real(h)),
        Part::Jm => (ParaNumber::new(0.0, h), ParaNumber::new(0.0, -h)),
    };
    let mut out = env.clone();
    for (which, delta) in [(Which::Z, dz), (Which::ZBar, dzb)] {
        let name = coord.slot.name(which);
        if let Some(v) = env.get(&name) {
            out.bind(name, v + delta);
        }
    }
    out
}

/// Central difference `(f(x + h) − f(x − h)) / 2h` along a real coordinate.
pub fn fd_oracle(
    expr: &Expr,
    env: &EvalEnvironment,
    coord: RealCoord,
    h: f64,
) -> Result<ParaNumber, ExprError> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let fp = expr.evaluate(&shifted(env, coord, h))?;
    let fm = expr.evaluate(&shifted(env, coord, -h))?;
    Ok((fp - fm).scale(0.5 / h))
}

/// Finite-difference Wirtinger derivative built from two [`fd_oracle`] calls.
pub fn fd_wirtinger(
    expr: &Expr,
    env: &EvalEnvironment,
    slot: Slot,
    which: Which,
    conv: DerivativeConvention,
    h: f64,
) -> Result<ParaNumber, ExprError> {
    let dx = fd_oracle(expr, env, slot.real(Part::Re), h)?;
    let dy = fd_oracle(expr, env, slot.real(Part::Jm), h)?;
    Ok((dx + ParaNumber::new(0.0, conv.j_sign(which)) * dy).scale(0.5))
}

/// One direction of a chart: a slot and which member of it.
pub type Direction = (Slot, Which);

/// Gradient and Hessian trees of one expression along a fixed list of
/// Wirtinger directions.
#[derive(Clone, Debug)]
pub struct DerivativeTable {
    pub directions: Vec<Direction>,
    pub grad: Vec<Expr>,
    /// `hess[a][b] = ∂/∂dir_b (∂f/∂dir_a)`.
    pub hess: Vec<Vec<Expr>>,
}

impl DerivativeTable {
    pub fn first_order(expr: &Expr, directions: Vec<Direction>, conv: DerivativeConvention) -> Self {
        let grad = directions
            .iter()
            .map(|&(s, w)| wirtinger_derivative(expr, s, w, conv))
            .collect();
        Self {
            directions,
            grad,
            hess: Vec::new(),
        }
    }

    pub fn second_order(expr: &Expr, directions: Vec<Direction>, conv: DerivativeConvention) -> Self {
        let mut table = Self::first_order(expr, directions, conv);
        let n = table.directions.len();
        let mut hess = vec![vec![Expr::zero(); n]; n];
        for a in 0..n {
            for b in a..n {
                let (s, w) = table.directions[b];
                let h = wirtinger_derivative(&table.grad[a], s, w, conv);
                hess[b][a] = h.clone();
                hess[a][b] = h;
            }
        }
        table.hess = hess;
        table
    }
}
