//! Expression trees over named paracomplex coordinates.
//!
//! Lagrangians, Hamiltonians, and constraint coefficients are all [`Expr`]
//! values. Trees are immutable and share subtrees through [`Arc`], so they
//! can be evaluated from several threads.

mod diff;
mod parse;
mod print;
mod simplify;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::coords::{parse_coordinate, Slot, Which};
use crate::para::{ParaError, ParaNumber};

pub use diff::{diff_formal, diff_real};
pub use parse::parse_expression;
pub use simplify::simplify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Conj,
    Sqrt,
    Exp,
    Log,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Conj => "conj",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
        }
    }

    pub fn apply(self, z: ParaNumber) -> Result<ParaNumber, ParaError> {
        match self {
            UnaryOp::Neg => Ok(-z),
            UnaryOp::Conj => Ok(z.conj()),
            UnaryOp::Sqrt => z.sqrt(),
            UnaryOp::Exp => Ok(z.exp()),
            UnaryOp::Log => z.ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }

    pub fn apply(self, a: ParaNumber, b: ParaNumber) -> Result<ParaNumber, ParaError> {
        match self {
            BinaryOp::Add => Ok(a + b),
            BinaryOp::Sub => Ok(a - b),
            BinaryOp::Mul => Ok(a * b),
            BinaryOp::Div => a.checked_div(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(ParaNumber),
    Coord(Arc<str>),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
    /// Integer power; the exponent is always a literal.
    Powi(Arc<Expr>, i32),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: expected one of {expected:?}, found {found}")]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unbound coordinate `{0}`")]
    UnboundCoordinate(String),
    #[error("{source} in `{location}`")]
    Eval {
        location: String,
        #[source]
        source: ParaError,
    },
}

impl ExprError {
    /// The underlying arithmetic error, if any.
    pub fn para_error(&self) -> Option<&ParaError> {
        match self {
            ExprError::Eval { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(ParaNumber::ZERO)
    }

    pub fn one() -> Self {
        Expr::Const(ParaNumber::ONE)
    }

    pub fn constant(value: impl Into<ParaNumber>) -> Self {
        Expr::Const(value.into())
    }

    pub fn coord(name: &str) -> Self {
        Expr::Coord(Arc::from(name))
    }

    pub fn slot(slot: Slot, which: Which) -> Self {
        Expr::coord(&slot.name(which))
    }

    pub fn as_const(&self) -> Option<ParaNumber> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(ParaNumber::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(ParaNumber::ONE)
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Self {
        Expr::Unary(op, Arc::new(child))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    pub fn powi(base: Expr, n: i32) -> Self {
        Expr::Powi(Arc::new(base), n)
    }

    /// Sum that drops literal zeros.
    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        if lhs.is_zero() {
            rhs
        } else if rhs.is_zero() {
            lhs
        } else {
            Expr::binary(BinaryOp::Add, lhs, rhs)
        }
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        if rhs.is_zero() {
            lhs
        } else if lhs.is_zero() {
            Expr::neg(rhs)
        } else {
            Expr::binary(BinaryOp::Sub, lhs, rhs)
        }
    }

    /// Product that short-circuits literal zeros and ones.
    pub fn mul(lhs: Expr, rhs: Expr) -> Self {
        if lhs.is_zero() || rhs.is_zero() {
            Expr::zero()
        } else if lhs.is_one() {
            rhs
        } else if rhs.is_one() {
            lhs
        } else {
            Expr::binary(BinaryOp::Mul, lhs, rhs)
        }
    }

    pub fn div(lhs: Expr, rhs: Expr) -> Self {
        if rhs.is_one() {
            lhs
        } else {
            Expr::binary(BinaryOp::Div, lhs, rhs)
        }
    }

    pub fn neg(e: Expr) -> Self {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => Arc::unwrap_or_clone(inner),
            other => Expr::unary(UnaryOp::Neg, other),
        }
    }

    pub fn scale(k: ParaNumber, e: Expr) -> Self {
        Expr::mul(Expr::Const(k), e)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    /// Names of every coordinate the tree references.
    pub fn coordinates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_coordinates(&mut out);
        out
    }

    fn collect_coordinates(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(name) => {
                out.insert(name.to_string());
            }
            Expr::Unary(_, c) | Expr::Powi(c, _) => c.collect_coordinates(out),
            Expr::Binary(_, a, b) => {
                a.collect_coordinates(out);
                b.collect_coordinates(out);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Coord(_) => 1,
            Expr::Unary(_, c) | Expr::Powi(c, _) => 1 + c.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Swap every coordinate with its conjugate slot and conjugate every
    /// constant. At conjugate-consistent points this evaluates to the
    /// conjugate of the original.
    pub fn conjugate_mirror(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Coord(name) => match parse_coordinate(name) {
                Some((slot, which)) => Expr::slot(slot, which.flip()),
                None => self.clone(),
            },
            Expr::Unary(op, c) => Expr::unary(*op, c.conjugate_mirror()),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.conjugate_mirror(), b.conjugate_mirror()),
            Expr::Powi(c, n) => Expr::powi(c.conjugate_mirror(), *n),
        }
    }

    pub fn evaluate(&self, env: &EvalEnvironment) -> Result<ParaNumber, ExprError> {
        evaluate(self, env)
    }
}

/// Coordinate bindings plus the time parameter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalEnvironment {
    bindings: Vec<(String, ParaNumber)>,
    pub time: f64,
}

impl EvalEnvironment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_time(time: f64) -> Self {
        Self {
            bindings: Vec::new(),
            time,
        }
    }

    /// Bind (or rebind) a coordinate; each name is held once.
    pub fn bind(&mut self, name: impl Into<String>, value: ParaNumber) -> &mut Self {
        let name = name.into();
        match self.bindings.iter_mut().find(|(n, _)| *n == name) {
            Some(entry) => entry.1 = value,
            None => self.bindings.push((name, value)),
        }
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: ParaNumber) -> Self {
        self.bind(name, value);
        self
    }

    /// Bind both members of a slot.
    pub fn bind_slot(&mut self, slot: Slot, z: ParaNumber, zbar: ParaNumber) -> &mut Self {
        self.bind(slot.z_name(), z);
        self.bind(slot.zbar_name(), zbar)
    }

    pub fn get(&self, name: &str) -> Option<ParaNumber> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn bindings(&self) -> &[(String, ParaNumber)] {
        &self.bindings
    }
}

pub fn evaluate(expr: &Expr, env: &EvalEnvironment) -> Result<ParaNumber, ExprError> {
    let located = |source: ParaError| ExprError::Eval {
        location: location_of(expr),
        source,
    };
    match expr {
        Expr::Const(c) => Ok(*c),
        Expr::Coord(name) => env
            .get(name)
            .ok_or_else(|| ExprError::UnboundCoordinate(name.to_string())),
        Expr::Unary(op, c) => op.apply(evaluate(c, env)?).map_err(located),
        Expr::Binary(op, a, b) => {
            let (a, b) = (evaluate(a, env)?, evaluate(b, env)?);
            op.apply(a, b).map_err(located)
        }
        Expr::Powi(c, n) => evaluate(c, env)?.powi(*n).map_err(located),
    }
}

fn location_of(expr: &Expr) -> String {
    const MAX: usize = 80;
    let text = expr.to_string();
    if text.chars().count() <= MAX {
        text
    } else {
        let cut: String = text.chars().take(MAX).collect();
        format!("{cut}...")
    }
}
