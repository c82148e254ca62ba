//! Bottom-up algebraic cleanup: constant folding, 0/1 identities,
//! cancellation of structurally equal operands, and double negation.
//! The result evaluates to the same value as the input wherever the input
//! is defined.

use std::sync::Arc;

use super::{BinaryOp, Expr, UnaryOp};
use crate::para::ParaNumber;

pub fn simplify(expr: &Expr) -> Expr {
    match expr {
        Expr::Const(_) | Expr::Coord(_) => expr.clone(),
        Expr::Unary(op, c) => simplify_unary(*op, simplify(c)),
        Expr::Binary(op, a, b) => simplify_binary(*op, simplify(a), simplify(b)),
        Expr::Powi(c, n) => simplify_powi(simplify(c), *n),
    }
}

fn simplify_unary(op: UnaryOp, c: Expr) -> Expr {
    if let Some(v) = c.as_const() {
        if let Ok(folded) = op.apply(v) {
            return Expr::Const(folded);
        }
    }
    match (op, c) {
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner))
        | (UnaryOp::Conj, Expr::Unary(UnaryOp::Conj, inner)) => Arc::unwrap_or_clone(inner),
        (op, c) => Expr::unary(op, c),
    }
}

fn simplify_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Ok(folded) = op.apply(x, y) {
            return Expr::Const(folded);
        }
    }
    match op {
        BinaryOp::Add => {
            if a.is_zero() {
                b
            } else if b.is_zero() {
                a
            } else if let Expr::Unary(UnaryOp::Neg, nb) = &b {
                simplify_binary(BinaryOp::Sub, a, (**nb).clone())
            } else {
                Expr::binary(op, a, b)
            }
        }
        BinaryOp::Sub => {
            if b.is_zero() {
                a
            } else if a == b {
                Expr::zero()
            } else if a.is_zero() {
                simplify_unary(UnaryOp::Neg, b)
            } else if let Expr::Unary(UnaryOp::Neg, nb) = &b {
                simplify_binary(BinaryOp::Add, a, (**nb).clone())
            } else {
                Expr::binary(op, a, b)
            }
        }
        BinaryOp::Mul => simplify_product(a, b),
        BinaryOp::Div => {
            if b.is_one() {
                a
            } else if a.is_zero() {
                Expr::zero()
            } else {
                Expr::binary(op, a, b)
            }
        }
    }
}

fn simplify_product(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    // Constants move to the left and merge with a leading constant factor.
    let (a, b) = match (a.as_const(), b.as_const()) {
        (None, Some(_)) => (b, a),
        _ => (a, b),
    };
    if let Some(k) = a.as_const() {
        if k == -ParaNumber::ONE {
            return simplify_unary(UnaryOp::Neg, b);
        }
        if let Expr::Binary(BinaryOp::Mul, inner_a, inner_b) = &b {
            if let Some(k2) = inner_a.as_const() {
                return simplify_product(Expr::Const(k * k2), (**inner_b).clone());
            }
        }
        if let Expr::Unary(UnaryOp::Neg, inner) = &b {
            return simplify_product(Expr::Const(-k), (**inner).clone());
        }
    }
    Expr::binary(BinaryOp::Mul, a, b)
}

fn simplify_powi(base: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::one(),
        1 => base,
        _ => {
            if let Some(v) = base.as_const() {
                if let Ok(folded) = v.powi(n) {
                    return Expr::Const(folded);
                }
            }
            Expr::powi(base, n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn s(text: &str) -> Expr {
        simplify(&parse_expression(text).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(s("z1*1 + 0"), Expr::coord("z1"));
        assert_eq!(s("2*3"), Expr::constant(6.0));
        assert_eq!(s("z1 - z1"), Expr::zero());
        assert_eq!(s("--z1"), Expr::coord("z1"));
        assert_eq!(s("conj(conj(z2))"), Expr::coord("z2"));
        assert_eq!(s("z1^1 + z2^0"), parse_expression("z1 + 1").unwrap());
        assert_eq!(s("J*J"), Expr::one());
        assert_eq!(s("0*sqrt(z1)"), Expr::zero());
    }

    #[test]
    fn constant_factors_collect() {
        assert_eq!(s("2*(3*z1)"), parse_expression("6*z1").unwrap());
        assert_eq!(s("z1*2"), parse_expression("2*z1").unwrap());
        assert_eq!(s("-1*z1"), parse_expression("-z1").unwrap());
    }

    #[test]
    fn zero_divisors_are_not_folded() {
        let e = s("1/(1+J)");
        assert!(matches!(e, Expr::Binary(BinaryOp::Div, _, _)));
        let e = s("sqrt(1-2*J)");
        assert!(matches!(e, Expr::Unary(UnaryOp::Sqrt, _)));
    }
}
