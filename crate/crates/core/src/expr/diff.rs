//! Symbolic partial derivatives with respect to real coordinates.
//!
//! Coordinates lift to reals as `z = x + j·y`, `zb = x − j·y`, so
//! `∂z/∂x = 1`, `∂z/∂y = j`, `∂zb/∂x = 1`, `∂zb/∂y = −j`.

use std::sync::Arc;

use super::{BinaryOp, Expr, UnaryOp};
use crate::coords::{parse_coordinate, Part, RealCoord, Which};
use crate::para::ParaNumber;

fn coord_derivative(name: &str, wrt: RealCoord) -> Expr {
    match parse_coordinate(name) {
        Some((slot, which)) if slot == wrt.slot => match (wrt.part, which) {
            (Part::Re, _) => Expr::one(),
            (Part::Jm, Which::Z) => Expr::Const(ParaNumber::J),
            (Part::Jm, Which::ZBar) => Expr::Const(-ParaNumber::J),
        },
        _ => Expr::zero(),
    }
}

/// `∂expr/∂wrt` as a new tree. Not simplified beyond trivial 0/1 pruning.
pub fn diff_real(expr: &Expr, wrt: RealCoord) -> Expr {
    match expr {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(name) => coord_derivative(name, wrt),
        Expr::Unary(op, u) => {
            let du = diff_real(u, wrt);
            if du.is_zero() {
                return Expr::zero();
            }
            let node = || Expr::Unary(*op, Arc::clone(u));
            match op {
                UnaryOp::Neg => Expr::neg(du),
                UnaryOp::Conj => Expr::unary(UnaryOp::Conj, du),
                UnaryOp::Sqrt => Expr::div(du, Expr::mul(Expr::constant(2.0), node())),
                UnaryOp::Exp => Expr::mul(node(), du),
                UnaryOp::Log => Expr::div(du, (**u).clone()),
            }
        }
        Expr::Binary(op, a, b) => {
            let (da, db) = (diff_real(a, wrt), diff_real(b, wrt));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => Expr::add(da, db),
                BinaryOp::Sub => Expr::sub(da, db),
                BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                BinaryOp::Div => {
                    if db.is_zero() {
                        Expr::div(da, b)
                    } else {
                        let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db));
                        Expr::div(num, Expr::powi(b, 2))
                    }
                }
            }
        }
        Expr::Powi(u, n) => {
            let du = diff_real(u, wrt);
            if du.is_zero() || *n == 0 {
                return Expr::zero();
            }
            let lowered = if *n == 1 {
                Expr::one()
            } else {
                Expr::powi((**u).clone(), n - 1)
            };
            Expr::mul(Expr::mul(Expr::constant(f64::from(*n)), lowered), du)
        }
    }
}

/// `∂expr/∂name` with every coordinate treated as an independent variable.
/// `None` when the tree contains `conj`, which has no formal derivative.
pub fn diff_formal(expr: &Expr, name: &str) -> Option<Expr> {
    Some(match expr {
        Expr::Const(_) => Expr::zero(),
        Expr::Coord(n) => {
            if &**n == name {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Unary(UnaryOp::Conj, _) => return None,
        Expr::Unary(op, u) => {
            let du = diff_formal(u, name)?;
            if du.is_zero() {
                return Some(Expr::zero());
            }
            let node = || Expr::Unary(*op, Arc::clone(u));
            match op {
                UnaryOp::Neg => Expr::neg(du),
                UnaryOp::Sqrt => Expr::div(du, Expr::mul(Expr::constant(2.0), node())),
                UnaryOp::Exp => Expr::mul(node(), du),
                UnaryOp::Log => Expr::div(du, (**u).clone()),
                UnaryOp::Conj => unreachable!(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (da, db) = (diff_formal(a, name)?, diff_formal(b, name)?);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => Expr::add(da, db),
                BinaryOp::Sub => Expr::sub(da, db),
                BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                BinaryOp::Div => {
                    if db.is_zero() {
                        Expr::div(da, b)
                    } else {
                        let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db));
                        Expr::div(num, Expr::powi(b, 2))
                    }
                }
            }
        }
        Expr::Powi(u, n) => {
            let du = diff_formal(u, name)?;
            if du.is_zero() || *n == 0 {
                return Some(Expr::zero());
            }
            let lowered = if *n == 1 {
                Expr::one()
            } else {
                Expr::powi((**u).clone(), n - 1)
            };
            Expr::mul(Expr::mul(Expr::constant(f64::from(*n)), lowered), du)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::Slot;
    use crate::expr::{parse_expression, simplify, EvalEnvironment};

    fn x1() -> RealCoord {
        Slot::position(1).real(Part::Re)
    }

    fn y1() -> RealCoord {
        Slot::position(1).real(Part::Jm)
    }

    #[test]
    fn lift_rules() {
        let z = parse_expression("z1").unwrap();
        assert_eq!(simplify(&diff_real(&z, y1())), Expr::Const(ParaNumber::J));
        assert_eq!(simplify(&diff_real(&z, x1())), Expr::one());
        let zb = parse_expression("zb1").unwrap();
        assert_eq!(simplify(&diff_real(&zb, y1())), Expr::Const(-ParaNumber::J));
        let c = parse_expression("3 + J").unwrap();
        assert_eq!(simplify(&diff_real(&c, x1())), Expr::zero());
        // other slots are constants
        let z2 = parse_expression("z2*zd1").unwrap();
        assert_eq!(simplify(&diff_real(&z2, x1())), Expr::zero());
    }

    #[test]
    fn paranorm_gradient_is_z_plus_zbar() {
        let e = parse_expression("z1*zb1").unwrap();
        let d = simplify(&diff_real(&e, x1()));
        let expected = parse_expression("z1 + zb1").unwrap();
        for (x, y) in [(0.3, -1.2), (2.0, 0.5), (-0.7, 0.1)] {
            let z = ParaNumber::new(x, y);
            let env = EvalEnvironment::new().with("z1", z).with("zb1", z.conj());
            let got = d.evaluate(&env).unwrap();
            assert_eq!(got, expected.evaluate(&env).unwrap());
            assert!((got - ParaNumber::real(2.0 * x)).max_abs() < 1e-15);
        }
    }
}
