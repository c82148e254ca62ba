//! Independent oracles for the integration tests.
//!
//! Nothing here calls the crate's numeric code: expressions are walked
//! directly on one null sheet with second-order forward-mode jets, linear
//! systems use a hand-written LU, and integration uses a plain f64 RK4.

#![allow(dead_code)]

use std::collections::HashMap;

use paramech::expr::{BinaryOp, UnaryOp};
use paramech::{Expr, ParaNumber};

/// Value, gradient and Hessian with respect to `n` real variables.
#[derive(Clone, Debug)]
pub struct Jet {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<Vec<f64>>,
}

impl Jet {
    pub fn constant(v: f64, n: usize) -> Self {
        Self {
            v,
            g: vec![0.0; n],
            h: vec![vec![0.0; n]; n],
        }
    }

    pub fn variable(v: f64, k: usize, n: usize) -> Self {
        let mut j = Self::constant(v, n);
        j.g[k] = 1.0;
        j
    }

    fn n(&self) -> usize {
        self.g.len()
    }

    fn zip(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let n = self.n();
        Jet {
            v: f(self.v, o.v),
            g: (0..n).map(|i| f(self.g[i], o.g[i])).collect(),
            h: (0..n).map(|i| (0..n).map(|k| f(self.h[i][k], o.h[i][k])).collect()).collect(),
        }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.n();
        Jet {
            v: self.v * o.v,
            g: (0..n).map(|i| self.g[i] * o.v + self.v * o.g[i]).collect(),
            h: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|k| {
                            self.h[i][k] * o.v + self.g[i] * o.g[k] + o.g[i] * self.g[k] + self.v * o.h[i][k]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `f(self)` given `f`, `f'`, `f''` at the value.
    pub fn chain(&self, f: f64, d1: f64, d2: f64) -> Jet {
        let n = self.n();
        Jet {
            v: f,
            g: self.g.iter().map(|g| d1 * g).collect(),
            h: (0..n)
                .map(|i| (0..n).map(|k| d1 * self.h[i][k] + d2 * self.g[i] * self.g[k]).collect())
                .collect(),
        }
    }
}

/// Evaluation on one null sheet: `J ↦ sigma`, every coordinate is a real
/// variable or a fixed real value.
pub struct SheetEval<'a> {
    pub sigma: f64,
    pub vars: &'a HashMap<String, usize>,
    pub values: &'a [f64],
    pub fixed: &'a HashMap<String, f64>,
}

impl SheetEval<'_> {
    pub fn eval(&self, e: &Expr) -> Jet {
        let n = self.values.len();
        match e {
            Expr::Const(c) => Jet::constant(c.re + self.sigma * c.jm, n),
            Expr::Coord(name) => {
                if let Some(&k) = self.vars.get(&**name) {
                    Jet::variable(self.values[k], k, n)
                } else if let Some(&v) = self.fixed.get(&**name) {
                    Jet::constant(v, n)
                } else {
                    panic!("unbound `{name}` in sheet evaluation")
                }
            }
            Expr::Unary(op, u) => {
                let a = self.eval(u);
                let x = a.v;
                match op {
                    UnaryOp::Neg => a.chain(-x, -1.0, 0.0),
                    UnaryOp::Sqrt => {
                        assert!(x > 0.0, "sqrt of {x} on sheet");
                        let s = x.sqrt();
                        a.chain(s, 0.5 / s, -0.25 / (s * x))
                    }
                    UnaryOp::Exp => {
                        let e = x.exp();
                        a.chain(e, e, e)
                    }
                    UnaryOp::Log => a.chain(x.ln(), 1.0 / x, -1.0 / (x * x)),
                    UnaryOp::Conj => panic!("conj couples the sheets"),
                }
            }
            Expr::Binary(op, l, r) => {
                let (a, b) = (self.eval(l), self.eval(r));
                match op {
                    BinaryOp::Add => a.add(&b),
                    BinaryOp::Sub => a.sub(&b),
                    BinaryOp::Mul => a.mul(&b),
                    BinaryOp::Div => {
                        let y = b.v;
                        a.mul(&b.chain(1.0 / y, -1.0 / (y * y), 2.0 / (y * y * y)))
                    }
                }
            }
            Expr::Powi(u, k) => {
                let a = self.eval(u);
                let x = a.v;
                let k = *k;
                let kf = f64::from(k);
                a.chain(x.powi(k), kf * x.powi(k - 1), kf * (kf - 1.0) * x.powi(k - 2))
            }
        }
    }
}

/// Value of `e` on sheet `sigma` with complete paracomplex bindings.
pub fn sheet_value(e: &Expr, sigma: f64, bindings: &[(&str, ParaNumber)]) -> f64 {
    let fixed: HashMap<String, f64> = bindings
        .iter()
        .map(|(k, v)| (k.to_string(), sheet_of(*v, sigma)))
        .collect();
    let vars = HashMap::new();
    SheetEval {
        sigma,
        vars: &vars,
        values: &[],
        fixed: &fixed,
    }
    .eval(e)
    .v
}

/// Component of `v` on sheet `sigma = ±1`.
pub fn sheet_of(v: ParaNumber, sigma: f64) -> f64 {
    v.re + sigma * v.jm
}

/// Gaussian elimination with partial pivoting.
pub fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

pub fn rk4(y: &[f64], dt: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let axpy = |h: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let k1 = f(y);
    let k2 = f(&axpy(0.5 * dt, &k1));
    let k3 = f(&axpy(0.5 * dt, &k2));
    let k4 = f(&axpy(dt, &k3));
    (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Constrained Hamiltonian flow on one sheet in variables
/// `(u_1..u_m, v_1..v_m)` standing for `(z, zb)`.
pub struct HamiltonianSheet {
    pub sigma: f64,
    pub m: usize,
    pub h: Expr,
    /// `(a, b)` coefficient trees per constraint.
    pub constraints: Vec<(Vec<Expr>, Vec<Expr>)>,
    pub fixed: HashMap<String, f64>,
    vars: HashMap<String, usize>,
}

impl HamiltonianSheet {
    pub fn new(
        sigma: f64,
        m: usize,
        h: Expr,
        constraints: Vec<(Vec<Expr>, Vec<Expr>)>,
        fixed: HashMap<String, f64>,
    ) -> Self {
        let mut vars = HashMap::new();
        for i in 0..m {
            vars.insert(format!("z{}", i + 1), i);
            vars.insert(format!("zb{}", i + 1), m + i);
        }
        Self {
            sigma,
            m,
            h,
            constraints,
            fixed,
            vars,
        }
    }

    pub fn rhs(&self, y: &[f64]) -> Vec<f64> {
        let m = self.m;
        let se = SheetEval {
            sigma: self.sigma,
            vars: &self.vars,
            values: y,
            fixed: &self.fixed,
        };
        let hj = se.eval(&self.h);
        let (hu, hv) = (&hj.g[..m], &hj.g[m..]);
        let coeffs: Vec<(Vec<f64>, Vec<f64>)> = self
            .constraints
            .iter()
            .map(|(a, b)| {
                (
                    a.iter().map(|e| se.eval(e).v).collect(),
                    b.iter().map(|e| se.eval(e).v).collect(),
                )
            })
            .collect();
        let s = coeffs.len();
        let lambda = if s == 0 {
            Vec::new()
        } else {
            // ω_a(Z) = 0  ⇔  Σ_c λ_c Σ_i (b_ai a_ci − a_ai b_ci) = Σ_i (a_ai H_vi − b_ai H_ui).
            let c: Vec<Vec<f64>> = (0..s)
                .map(|a| {
                    (0..s)
                        .map(|k| (0..m).map(|i| coeffs[a].1[i] * coeffs[k].0[i] - coeffs[a].0[i] * coeffs[k].1[i]).sum())
                        .collect()
                })
                .collect();
            let r: Vec<f64> = (0..s)
                .map(|a| (0..m).map(|i| coeffs[a].0[i] * hv[i] - coeffs[a].1[i] * hu[i]).sum())
                .collect();
            lu_solve(c, r).expect("multiplier system is singular on the sheet")
        };
        let mut out = vec![0.0; 2 * m];
        for i in 0..m {
            let fb: f64 = (0..s).map(|k| lambda[k] * coeffs[k].1[i]).sum();
            let fa: f64 = (0..s).map(|k| lambda[k] * coeffs[k].0[i]).sum();
            out[i] = -self.sigma * (hv[i] + fb);
            out[m + i] = self.sigma * (hu[i] + fa);
        }
        out
    }
}

/// Unconstrained Euler-Lagrange flow on one sheet in variables
/// `(u, v, a, b)` standing for `(z, zb, zd, zdb)`.
pub struct LagrangianSheet {
    pub sigma: f64,
    pub m: usize,
    pub l: Expr,
    vars: HashMap<String, usize>,
}

impl LagrangianSheet {
    pub fn new(sigma: f64, m: usize, l: Expr) -> Self {
        let mut vars = HashMap::new();
        for i in 0..m {
            vars.insert(format!("z{}", i + 1), i);
            vars.insert(format!("zb{}", i + 1), m + i);
            vars.insert(format!("zd{}", i + 1), 2 * m + i);
            vars.insert(format!("zdb{}", i + 1), 3 * m + i);
        }
        Self { sigma, m, l, vars }
    }

    /// `M q̈ = ∂L/∂q − (∂²L/∂q̇∂q) q̇`.
    pub fn rhs(&self, y: &[f64]) -> Vec<f64> {
        let n = 2 * self.m;
        let fixed = HashMap::new();
        let j = SheetEval {
            sigma: self.sigma,
            vars: &self.vars,
            values: y,
            fixed: &fixed,
        }
        .eval(&self.l);
        let mass: Vec<Vec<f64>> = (0..n).map(|f| (0..n).map(|k| j.h[n + f][n + k]).collect()).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|f| j.g[f] - (0..n).map(|k| j.h[n + f][k] * y[n + k]).sum::<f64>())
            .collect();
        let acc = lu_solve(mass, rhs).expect("singular sheet mass matrix");
        y[n..].iter().copied().chain(acc).collect()
    }
}

/// Componentwise deviation relative to `max(1, |expected|)`.
pub fn rel_dev(got: f64, expected: f64) -> f64 {
    (got - expected).abs() / expected.abs().max(1.0)
}

/// Paracomplex value of `e` assembled from its two sheet values.
pub fn para_value(e: &Expr, bindings: &HashMap<String, ParaNumber>) -> ParaNumber {
    let at = |sigma: f64| {
        let fixed: HashMap<String, f64> = bindings.iter().map(|(k, v)| (k.clone(), sheet_of(*v, sigma))).collect();
        let vars = HashMap::new();
        SheetEval {
            sigma,
            vars: &vars,
            values: &[],
            fixed: &fixed,
        }
        .eval(e)
        .v
    };
    let (p, m) = (at(1.0), at(-1.0));
    ParaNumber::new(0.5 * (p + m), 0.5 * (p - m))
}

/// Central-difference Wirtinger derivative along `name`'s slot, perturbing
/// the real coordinates of the pair `(z, zb)` together:
/// `∂_x: z += h, zb += h`; `∂_y: z += jh, zb −= jh`; combined as
/// `½(∂_x + s j ∂_y)` with `s = ±1` chosen by the caller.
pub fn fd_wirtinger_pair(
    e: &Expr,
    bindings: &HashMap<String, ParaNumber>,
    z: &str,
    zb: &str,
    s: f64,
    h: f64,
) -> ParaNumber {
    let shifted = |dz: ParaNumber, dzb: ParaNumber| {
        let mut b = bindings.clone();
        *b.get_mut(z).expect("z bound") += dz;
        *b.get_mut(zb).expect("zb bound") += dzb;
        para_value(e, &b)
    };
    let dx = (shifted(ParaNumber::real(h), ParaNumber::real(h)) - shifted(ParaNumber::real(-h), ParaNumber::real(-h)))
        .scale(0.5 / h);
    let dy = (shifted(ParaNumber::new(0.0, h), ParaNumber::new(0.0, -h))
        - shifted(ParaNumber::new(0.0, -h), ParaNumber::new(0.0, h)))
    .scale(0.5 / h);
    (dx + ParaNumber::new(0.0, s) * dy).scale(0.5)
}
