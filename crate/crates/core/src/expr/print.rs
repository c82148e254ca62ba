//! Canonical text form. The output is valid input for the parser and
//! parenthesizes exactly where precedence or associativity requires it.

use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};
use crate::para::ParaNumber;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const NEGATION: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn literal(v: f64) -> String {
    format!("{v:?}")
}

fn const_text(c: ParaNumber) -> (String, u8) {
    let ParaNumber { re, jm } = c;
    if jm == 0.0 {
        if re < 0.0 {
            (format!("-{}", literal(-re)), NEGATION)
        } else {
            (literal(re), ATOM)
        }
    } else if re == 0.0 {
        match jm {
            1.0 => ("J".into(), ATOM),
            -1.0 => ("-J".into(), NEGATION),
            _ if jm < 0.0 => (format!("-{}*J", literal(-jm)), PRODUCT),
            _ => (format!("{}*J", literal(jm)), PRODUCT),
        }
    } else {
        let head = if re < 0.0 {
            format!("-{}", literal(-re))
        } else {
            literal(re)
        };
        let tail = if jm < 0.0 {
            format!(" - {}*J", literal(-jm))
        } else {
            format!(" + {}*J", literal(jm))
        };
        (head + &tail, SUM)
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) => const_text(*c).1,
        Expr::Coord(_) => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => NEGATION,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Expr::Binary(..) => PRODUCT,
        Expr::Powi(..) => POWER,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => f.write_str(&const_text(*c).0),
            Expr::Coord(name) => f.write_str(name),
            Expr::Unary(UnaryOp::Neg, c) => {
                f.write_str("-")?;
                write_wrapped(f, c, precedence(c) < NEGATION)
            }
            Expr::Unary(op, c) => write!(f, "{}({c})", op.name()),
            Expr::Binary(op, a, b) => {
                let level = precedence(self);
                write_wrapped(f, a, precedence(a) < level)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(f, b, precedence(b) <= level)
            }
            Expr::Powi(base, n) => {
                write_wrapped(f, base, precedence(base) < ATOM)?;
                write!(f, "^{n}")
            }
        }
    }
}
