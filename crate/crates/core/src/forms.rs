//! Differential forms over a paracomplex chart.
//!
//! Over a chart of `n` slots the 1-form basis is `dz_1..dz_n, dzb_1..dzb_n`
//! (index `p` in `0..2n`). Two-forms store one coefficient per basis pair
//! `e_p ∧ e_q` with `p < q`; the opposite order is implied by antisymmetry.
//! Interior products contract into the first slot:
//! `i_v(e_p ∧ e_q) = e_p(v) e_q − e_q(v) e_p`.

use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::{wirtinger_derivative, DerivativeConvention};
use crate::coords::{Chart, Which};
use crate::expr::{simplify, EvalEnvironment, Expr, ExprError};
use crate::para::ParaNumber;

const MINUS_J: ParaNumber = ParaNumber::new(0.0, -1.0);

/// Numeric vector `Σ z_i ∂/∂z_i + zbar_i ∂/∂zb_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorFieldValue {
    pub z: Vec<ParaNumber>,
    pub zbar: Vec<ParaNumber>,
}

impl VectorFieldValue {
    pub fn new(z: Vec<ParaNumber>, zbar: Vec<ParaNumber>) -> Self {
        assert_eq!(z.len(), zbar.len(), "vector halves must have equal length");
        Self { z, zbar }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![ParaNumber::ZERO; n], vec![ParaNumber::ZERO; n])
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Component along basis direction `p` in `0..2n`.
    pub fn component(&self, p: usize) -> ParaNumber {
        let n = self.dim();
        if p < n {
            self.z[p]
        } else {
            self.zbar[p - n]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.z
            .iter()
            .chain(&self.zbar)
            .map(|v| v.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().chain(&self.zbar).all(|v| v.is_finite())
    }
}

/// `J(∂/∂z) = −j ∂/∂z`, `J(∂/∂zb) = j ∂/∂zb`.
pub fn apply_j(v: &VectorFieldValue) -> VectorFieldValue {
    VectorFieldValue::new(
        v.z.iter().map(|&c| MINUS_J * c).collect(),
        v.zbar.iter().map(|&c| ParaNumber::J * c).collect(),
    )
}

/// Symbolic 1-form `Σ z_i dz_i + zbar_i dzb_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub chart: Chart,
    pub z: Vec<Expr>,
    pub zbar: Vec<Expr>,
}

/// A 1-form evaluated at a point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OneFormValue {
    pub z: Vec<ParaNumber>,
    pub zbar: Vec<ParaNumber>,
}

impl OneFormValue {
    pub fn zeros(n: usize) -> Self {
        Self {
            z: vec![ParaNumber::ZERO; n],
            zbar: vec![ParaNumber::ZERO; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn component(&self, p: usize) -> ParaNumber {
        let n = self.dim();
        if p < n {
            self.z[p]
        } else {
            self.zbar[p - n]
        }
    }

    pub fn component_mut(&mut self, p: usize) -> &mut ParaNumber {
        let n = self.dim();
        if p < n {
            &mut self.z[p]
        } else {
            &mut self.zbar[p - n]
        }
    }

    /// Dual pairing `ω(v)`.
    pub fn pair(&self, v: &VectorFieldValue) -> ParaNumber {
        assert_eq!(self.dim(), v.dim(), "dimension mismatch");
        self.z
            .iter()
            .zip(&v.z)
            .chain(self.zbar.iter().zip(&v.zbar))
            .map(|(a, b)| *a * *b)
            .sum()
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_deviation(&self, other: &OneFormValue) -> f64 {
        (0..2 * self.dim())
            .map(|p| (self.component(p) - other.component(p)).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_deviation(&OneFormValue::zeros(self.dim()))
    }
}

impl OneForm {
    pub fn zero(chart: Chart) -> Self {
        let n = chart.len();
        Self {
            chart,
            z: vec![Expr::zero(); n],
            zbar: vec![Expr::zero(); n],
        }
    }

    pub fn new(chart: Chart, z: Vec<Expr>, zbar: Vec<Expr>) -> Self {
        assert!(z.len() == chart.len() && zbar.len() == chart.len(), "1-form length must match chart");
        Self { chart, z, zbar }
    }

    pub fn dim(&self) -> usize {
        self.chart.len()
    }

    pub fn coeff(&self, p: usize) -> &Expr {
        let n = self.dim();
        if p < n {
            &self.z[p]
        } else {
            &self.zbar[p - n]
        }
    }

    /// `df = Σ ∂f/∂z_i dz_i + ∂f/∂zb_i dzb_i`.
    pub fn differential(f: &Expr, chart: Chart, conv: DerivativeConvention) -> Self {
        let z = chart
            .slots()
            .iter()
            .map(|&s| wirtinger_derivative(f, s, Which::Z, conv))
            .collect();
        let zbar = chart
            .slots()
            .iter()
            .map(|&s| wirtinger_derivative(f, s, Which::ZBar, conv))
            .collect();
        Self { chart, z, zbar }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            chart: self.chart.clone(),
            z: self.z.iter().map(&f).collect(),
            zbar: self.zbar.iter().map(&f).collect(),
        }
    }

    pub fn simplified(&self) -> Self {
        self.map(simplify)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.z.iter().chain(&self.zbar).all(|c| simplify(c).is_zero())
    }

    pub fn evaluate(&self, env: &EvalEnvironment) -> Result<OneFormValue, ExprError> {
        Ok(OneFormValue {
            z: self.z.iter().map(|c| c.evaluate(env)).collect::<Result<_, _>>()?,
            zbar: self.zbar.iter().map(|c| c.evaluate(env)).collect::<Result<_, _>>()?,
        })
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: &mut bool, coeff: &Expr, basis: &str) -> fmt::Result {
    if coeff.is_zero() {
        return Ok(());
    }
    if !*first {
        f.write_str(" + ")?;
    }
    *first = false;
    if coeff.is_one() {
        f.write_str(basis)
    } else {
        write!(f, "({coeff})*{basis}")
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in 0..2 * self.dim() {
            write_term(f, &mut first, &simplify(self.coeff(p)), &self.chart.basis_name(p))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `J*(dz) = −j dz`, `J*(dzb) = j dzb`.
pub fn apply_jstar(w: &OneForm) -> OneForm {
    OneForm {
        chart: w.chart.clone(),
        z: w.z.iter().map(|c| simplify(&Expr::scale(MINUS_J, c.clone()))).collect(),
        zbar: w.zbar.iter().map(|c| simplify(&Expr::scale(ParaNumber::J, c.clone()))).collect(),
    }
}

/// `d_J L = −j ∂L/∂z_i dz_i + j ∂L/∂zb_i dzb_i`.
pub fn vertical_differential(l: &Expr, chart: Chart, conv: DerivativeConvention) -> OneForm {
    apply_jstar(&OneForm::differential(l, chart, conv))
}

/// Symbolic 2-form with canonical `p < q` storage.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub chart: Chart,
    coeffs: Vec<Vec<Expr>>,
}

/// A 2-form evaluated at a point, stored as a full antisymmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormValue {
    pub matrix: Vec<Vec<ParaNumber>>,
}

impl TwoFormValue {
    pub fn dim(&self) -> usize {
        self.matrix.len() / 2
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .map(|v| v.max_abs())
            .fold(0.0, f64::max)
    }
}

impl TwoForm {
    pub fn zero(chart: Chart) -> Self {
        let d = 2 * chart.len();
        Self {
            chart,
            coeffs: vec![vec![Expr::zero(); d]; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.chart.len()
    }

    /// Coefficient of `e_p ∧ e_q` with the antisymmetric sign applied.
    pub fn coeff(&self, p: usize, q: usize) -> Expr {
        match p.cmp(&q) {
            std::cmp::Ordering::Less => self.coeffs[p][q].clone(),
            std::cmp::Ordering::Greater => simplify(&Expr::neg(self.coeffs[q][p].clone())),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    }

    /// Accumulate `c · e_p ∧ e_q`, folding into canonical order.
    pub fn add_term(&mut self, p: usize, q: usize, c: Expr) {
        match p.cmp(&q) {
            std::cmp::Ordering::Less => {
                let cur = std::mem::replace(&mut self.coeffs[p][q], Expr::zero());
                self.coeffs[p][q] = Expr::add(cur, c);
            }
            std::cmp::Ordering::Greater => {
                let cur = std::mem::replace(&mut self.coeffs[q][p], Expr::zero());
                self.coeffs[q][p] = Expr::sub(cur, c);
            }
            std::cmp::Ordering::Equal => {}
        }
    }

    pub fn simplified(mut self) -> Self {
        for row in &mut self.coeffs {
            for c in row.iter_mut() {
                *c = simplify(c);
            }
        }
        self
    }

    pub fn negated(mut self) -> Self {
        for row in &mut self.coeffs {
            for c in row.iter_mut() {
                *c = simplify(&Expr::neg(c.clone()));
            }
        }
        self
    }

    /// `dz_i ∧ dz_j` block entry.
    pub fn zz(&self, i: usize, j: usize) -> Expr {
        self.coeff(i, j)
    }

    /// `dz_i ∧ dzb_j` block entry.
    pub fn zzbar(&self, i: usize, j: usize) -> Expr {
        self.coeff(i, self.dim() + j)
    }

    /// `dzb_i ∧ dzb_j` block entry.
    pub fn zbarzbar(&self, i: usize, j: usize) -> Expr {
        let n = self.dim();
        self.coeff(n + i, n + j)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| simplify(c).is_zero())
    }

    pub fn evaluate(&self, env: &EvalEnvironment) -> Result<TwoFormValue, ExprError> {
        let d = 2 * self.dim();
        let mut matrix = vec![vec![ParaNumber::ZERO; d]; d];
        for p in 0..d {
            for q in p + 1..d {
                let c = &self.coeffs[p][q];
                if c.is_zero() {
                    continue;
                }
                let v = c.evaluate(env)?;
                matrix[p][q] = v;
                matrix[q][p] = -v;
            }
        }
        Ok(TwoFormValue { matrix })
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = 2 * self.dim();
        let mut first = true;
        for p in 0..d {
            for q in p + 1..d {
                let basis = format!("{}^{}", self.chart.basis_name(p), self.chart.basis_name(q));
                write_term(f, &mut first, &simplify(&self.coeffs[p][q]), &basis)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `d(Σ f_q e_q) = Σ_{p,q} ∂f_q/∂e_p · e_p ∧ e_q`.
pub fn exterior_derivative(w: &OneForm, conv: DerivativeConvention) -> TwoForm {
    let d = 2 * w.dim();
    let mut out = TwoForm::zero(w.chart.clone());
    for q in 0..d {
        let f = w.coeff(q);
        if f.is_zero() {
            continue;
        }
        for p in 0..d {
            if p == q {
                continue;
            }
            let (slot, which) = w.chart.direction(p);
            let df = wirtinger_derivative(f, slot, which, conv);
            if !df.is_zero() {
                out.add_term(p, q, df);
            }
        }
    }
    out.simplified()
}

/// `Φ_L = −d d_J L`.
pub fn kahler_form(l: &Expr, chart: Chart, conv: DerivativeConvention) -> TwoForm {
    exterior_derivative(&vertical_differential(l, chart, conv), conv).negated()
}

/// `i_v w` evaluated at `env`.
pub fn interior_product(
    v: &VectorFieldValue,
    w: &TwoForm,
    env: &EvalEnvironment,
) -> Result<OneFormValue, ExprError> {
    Ok(interior_product_value(v, &w.evaluate(env)?))
}

pub fn interior_product_value(v: &VectorFieldValue, w: &TwoFormValue) -> OneFormValue {
    assert_eq!(v.dim(), w.dim(), "dimension mismatch");
    let d = 2 * v.dim();
    let mut out = OneFormValue::zeros(v.dim());
    for p in 0..d {
        let vp = v.component(p);
        if vp.is_zero() {
            continue;
        }
        for q in 0..d {
            *out.component_mut(q) += vp * w.matrix[p][q];
        }
    }
    out
}

/// Vertical derivation `i_J` on a 1-form: `(i_J ω)(X) = ω(JX)`.
pub fn vertical_derivation_one(w: &OneForm) -> OneForm {
    apply_jstar(w)
}

/// Vertical derivation `i_J` on a 2-form:
/// `(i_J Φ)(X, Y) = Φ(JX, Y) + Φ(X, JY)`. Higher degrees are not provided.
pub fn vertical_derivation_two(w: &TwoForm) -> TwoForm {
    let n = w.dim();
    let sigma = |p: usize| if p < n { MINUS_J } else { ParaNumber::J };
    let mut out = TwoForm::zero(w.chart.clone());
    for p in 0..2 * n {
        for q in p + 1..2 * n {
            let c = &w.coeffs[p][q];
            if !c.is_zero() {
                out.coeffs[p][q] = Expr::scale(sigma(p) + sigma(q), c.clone());
            }
        }
    }
    out.simplified()
}

/// Para-Liouville form `λ = ½ j (z_i dzb_i − zb_i dz_i)` and `Φ = −dλ`
/// on the cotangent chart `z_1..z_m`.
pub fn canonical_structures(m: usize) -> (OneForm, TwoForm) {
    assert!(m >= 1, "dimension must be positive");
    let chart = Chart::positions(m);
    let half_j = ParaNumber::new(0.0, 0.5);
    let z = chart
        .slots()
        .iter()
        .map(|&s| Expr::scale(-half_j, Expr::slot(s, Which::ZBar)))
        .collect();
    let zbar = chart
        .slots()
        .iter()
        .map(|&s| Expr::scale(half_j, Expr::slot(s, Which::Z)))
        .collect();
    let lambda = OneForm::new(chart, z, zbar);
    let phi = exterior_derivative(&lambda, DerivativeConvention::Independent).negated();
    (lambda, phi)
}

/// A numeric p-form in the `2n` basis, keyed by the bitmask of basis indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FormValue {
    pub degree: usize,
    pub terms: BTreeMap<u64, ParaNumber>,
}

impl FormValue {
    pub fn from_one(w: &OneFormValue) -> Self {
        let mut terms = BTreeMap::new();
        for p in 0..2 * w.dim() {
            let c = w.component(p);
            if !c.is_zero() {
                terms.insert(1u64 << p, c);
            }
        }
        Self { degree: 1, terms }
    }

    pub fn from_two(w: &TwoFormValue) -> Self {
        let d = w.matrix.len();
        let mut terms = BTreeMap::new();
        for p in 0..d {
            for q in p + 1..d {
                let c = w.matrix[p][q];
                if !c.is_zero() {
                    terms.insert((1u64 << p) | (1u64 << q), c);
                }
            }
        }
        Self { degree: 2, terms }
    }

    pub fn wedge(&self, other: &FormValue) -> FormValue {
        let mut terms: BTreeMap<u64, ParaNumber> = BTreeMap::new();
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                // Sign of sorting the concatenated index list: count pairs
                // (i in a, j in b) with i > j.
                let mut inversions = 0u32;
                let mut rest = mb;
                while rest != 0 {
                    let j = rest.trailing_zeros();
                    inversions += (ma >> (j + 1)).count_ones();
                    rest &= rest - 1;
                }
                let c = if inversions.is_multiple_of(2) { ca * cb } else { -(ca * cb) };
                *terms.entry(ma | mb).or_insert(ParaNumber::ZERO) += c;
            }
        }
        FormValue {
            degree: self.degree + other.degree,
            terms,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}
