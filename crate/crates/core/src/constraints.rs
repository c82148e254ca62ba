//! Constraint 1-forms, distribution rank, and the sampled Frobenius test.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::DerivativeConvention;
use crate::coords::Chart;
use crate::expr::{parse_expression, simplify, EvalEnvironment, Expr, ExprError};
use crate::forms::{exterior_derivative, FormValue, OneForm, VectorFieldValue};
use crate::para::ParaNumber;

/// Fewest sample points `classify` accepts.
pub const MIN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintFlavor {
    /// `a` on `dz_i`, `b` on `dzd_i`.
    Lagrangian,
    /// `a` on `dz_i`, `b` on `dzb_i`.
    Hamiltonian,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConstraintError {
    #[error("constraint coefficient lists have lengths {a} and {b}, expected {m}")]
    LengthMismatch { a: usize, b: usize, m: usize },
    #[error("constraint is identically zero")]
    IdenticallyZero,
    #[error("constraints mix flavors or dimensions")]
    Heterogeneous,
    #[error("dimension too small: {basis} basis 1-forms cannot hold {r} constraints plus a 2-form")]
    DimensionTooSmall { basis: usize, r: usize },
    #[error("at least {MIN_SAMPLES} sample points are required, got {0}")]
    TooFewSamples(usize),
    #[error("basis of {0} 1-forms exceeds the 64 supported by the wedge kernel")]
    TooManyBasisForms(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `ω = Σ a_i dz_i + b_i d(·)_i`, the second basis set chosen by `flavor`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintForm {
    pub a: Vec<Expr>,
    pub b: Vec<Expr>,
    pub flavor: ConstraintFlavor,
}

impl ConstraintForm {
    pub fn new(a: Vec<Expr>, b: Vec<Expr>, flavor: ConstraintFlavor) -> Result<Self, ConstraintError> {
        let m = a.len().max(b.len());
        if a.len() != b.len() || m == 0 {
            return Err(ConstraintError::LengthMismatch { a: a.len(), b: b.len(), m });
        }
        let a: Vec<Expr> = a.iter().map(simplify).collect();
        let b: Vec<Expr> = b.iter().map(simplify).collect();
        if a.iter().chain(&b).all(Expr::is_zero) {
            return Err(ConstraintError::IdenticallyZero);
        }
        Ok(Self { a, b, flavor })
    }

    pub fn parse(a: &[&str], b: &[&str], flavor: ConstraintFlavor) -> Result<Self, ConstraintError> {
        let parse_all = |texts: &[&str]| {
            texts
                .iter()
                .map(|t| parse_expression(t))
                .collect::<Result<Vec<_>, _>>()
        };
        Self::new(parse_all(a)?, parse_all(b)?, flavor)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Swap every coordinate with its conjugate partner and conjugate constants.
    pub fn conjugate_mirror(&self) -> Self {
        Self {
            a: self.a.iter().map(Expr::conjugate_mirror).collect(),
            b: self.b.iter().map(Expr::conjugate_mirror).collect(),
            flavor: self.flavor,
        }
    }

    /// `f·ω`.
    pub fn scaled(&self, f: &Expr) -> Self {
        let scale = |c: &Expr| simplify(&Expr::mul(f.clone(), c.clone()));
        Self {
            a: self.a.iter().map(scale).collect(),
            b: self.b.iter().map(scale).collect(),
            flavor: self.flavor,
        }
    }

    pub fn coefficients(&self, env: &EvalEnvironment) -> Result<(Vec<ParaNumber>, Vec<ParaNumber>), ExprError> {
        let eval = |cs: &[Expr]| cs.iter().map(|c| c.evaluate(env)).collect::<Result<Vec<_>, _>>();
        Ok((eval(&self.a)?, eval(&self.b)?))
    }

    /// The form on its natural chart: `z_1..z_m` for the Hamiltonian flavor,
    /// `z_1..z_m, zd_1..zd_m` for the Lagrangian flavor.
    pub fn one_form(&self) -> OneForm {
        let m = self.dim();
        match self.flavor {
            ConstraintFlavor::Hamiltonian => OneForm::new(Chart::positions(m), self.a.clone(), self.b.clone()),
            ConstraintFlavor::Lagrangian => {
                let z = self.a.iter().chain(&self.b).cloned().collect();
                OneForm::new(Chart::tangent(m), z, vec![Expr::zero(); 2 * m])
            }
        }
    }
}

/// `ω(v) = Σ a_i v.z_i + b_i v.zbar_i`.
pub fn residual(omega: &ConstraintForm, v: &VectorFieldValue, env: &EvalEnvironment) -> Result<ParaNumber, ExprError> {
    assert_eq!(omega.dim(), v.dim(), "dimension mismatch");
    let (a, b) = omega.coefficients(env)?;
    Ok(a.iter()
        .zip(&v.z)
        .chain(b.iter().zip(&v.zbar))
        .map(|(c, x)| *c * *x)
        .sum())
}

fn real_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max().max(1.0);
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

/// `2m − rank` of the constraint matrix on the plus and minus null sheets.
pub fn distribution_rank_per_sheet(
    constraints: &[ConstraintForm],
    env: &EvalEnvironment,
    m: usize,
) -> Result<(usize, usize), ExprError> {
    let r = constraints.len();
    let mut plus = DMatrix::zeros(r, 2 * m);
    let mut minus = DMatrix::zeros(r, 2 * m);
    for (row, omega) in constraints.iter().enumerate() {
        assert_eq!(omega.dim(), m, "dimension mismatch");
        let (a, b) = omega.coefficients(env)?;
        for (col, c) in a.iter().chain(&b).enumerate() {
            let split = c.null_split();
            plus[(row, col)] = split.plus;
            minus[(row, col)] = split.minus;
        }
    }
    Ok((2 * m - real_rank(&plus), 2 * m - real_rank(&minus)))
}

/// Dimension of the annihilated distribution, the smaller of the two sheets.
pub fn distribution_rank(constraints: &[ConstraintForm], env: &EvalEnvironment, m: usize) -> Result<usize, ExprError> {
    let (p, q) = distribution_rank_per_sheet(constraints, env, m)?;
    Ok(p.min(q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holonomic,
    Anholonomic,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<String, ParaNumber>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyVerdict {
    pub verdict: Verdict,
    /// The sample with the largest `|ω_1∧…∧ω_r∧dω_a|`.
    pub witness: Witness,
    pub samples_tested: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub holonomic: f64,
    pub anholonomic: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            holonomic: 1e-9,
            anholonomic: 1e-6,
        }
    }
}

pub fn classify(
    constraints: &[ConstraintForm],
    samples: &[EvalEnvironment],
    conv: DerivativeConvention,
) -> Result<HolonomyVerdict, ConstraintError> {
    classify_with(constraints, samples, conv, Thresholds::default())
}

pub fn classify_with(
    constraints: &[ConstraintForm],
    samples: &[EvalEnvironment],
    conv: DerivativeConvention,
    thresholds: Thresholds,
) -> Result<HolonomyVerdict, ConstraintError> {
    if samples.len() < MIN_SAMPLES {
        return Err(ConstraintError::TooFewSamples(samples.len()));
    }
    let forms: Vec<OneForm> = constraints.iter().map(ConstraintForm::one_form).collect();
    if let Some(first) = constraints.first() {
        if constraints
            .iter()
            .any(|c| c.flavor != first.flavor || c.dim() != first.dim())
        {
            return Err(ConstraintError::Heterogeneous);
        }
    }
    let basis = forms.first().map_or(0, |f| 2 * f.dim());
    let r = constraints.len();
    if basis > 64 {
        return Err(ConstraintError::TooManyBasisForms(basis));
    }
    if r > 0 && basis < r + 2 {
        return Err(ConstraintError::DimensionTooSmall { basis, r });
    }
    let differentials: Vec<_> = forms.iter().map(|w| exterior_derivative(w, conv)).collect();

    let mut worst = (0.0_f64, 0usize);
    for (k, env) in samples.iter().enumerate() {
        let mut value = 0.0_f64;
        if r > 0 {
            let mut ideal = FormValue::from_one(&forms[0].evaluate(env)?);
            for w in &forms[1..] {
                ideal = ideal.wedge(&FormValue::from_one(&w.evaluate(env)?));
            }
            for dw in &differentials {
                let d = FormValue::from_two(&dw.evaluate(env)?);
                value = value.max(ideal.wedge(&d).max_abs());
            }
        }
        if !value.is_finite() {
            value = f64::INFINITY;
        }
        if value > worst.0 || k == 0 {
            worst = (value, k);
        }
    }
    let verdict = if worst.0 > thresholds.anholonomic {
        Verdict::Anholonomic
    } else if worst.0 <= thresholds.holonomic {
        Verdict::Holonomic
    } else {
        Verdict::Inconclusive
    };
    Ok(HolonomyVerdict {
        verdict,
        witness: Witness {
            point: samples[worst.1].bindings().iter().cloned().collect(),
            value: worst.0,
        },
        samples_tested: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::Slot;
    use crate::forms::OneFormValue;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const H: ConstraintFlavor = ConstraintFlavor::Hamiltonian;
    const IND: DerivativeConvention = DerivativeConvention::Independent;

    fn p(re: f64, jm: f64) -> ParaNumber {
        ParaNumber::new(re, jm)
    }

    fn samples(m: usize, seed: u64, count: usize) -> Vec<EvalEnvironment> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut env = EvalEnvironment::new();
                for i in 1..=m {
                    let z = p(rng.gen_range(0.3..1.5), rng.gen_range(-0.25..0.25));
                    env.bind_slot(Slot::position(i), z, z.conj());
                }
                env
            })
            .collect()
    }

    #[test]
    fn residual_examples() {
        let w = ConstraintForm::parse(&["1"], &["0"], H).unwrap();
        let env = EvalEnvironment::new();
        let v = VectorFieldValue::new(vec![ParaNumber::ZERO], vec![p(3.0, 4.0)]);
        assert_eq!(residual(&w, &v, &env).unwrap(), ParaNumber::ZERO);
        let v = VectorFieldValue::new(vec![ParaNumber::ONE], vec![ParaNumber::ZERO]);
        assert_eq!(residual(&w, &v, &env).unwrap(), ParaNumber::ONE);
    }

    #[test]
    fn zero_constraint_is_rejected() {
        assert_eq!(
            ConstraintForm::parse(&["0", "z1 - z1"], &["0", "0"], H),
            Err(ConstraintError::IdenticallyZero)
        );
        assert!(matches!(
            ConstraintForm::parse(&["1"], &["0", "0"], H),
            Err(ConstraintError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        let env = EvalEnvironment::new();
        let dz1 = ConstraintForm::parse(&["1", "0"], &["0", "0"], H).unwrap();
        let twice = ConstraintForm::parse(&["2", "0"], &["0", "0"], H).unwrap();
        assert_eq!(distribution_rank(std::slice::from_ref(&dz1), &env, 2).unwrap(), 3);
        assert_eq!(distribution_rank(&[dz1, twice], &env, 2).unwrap(), 3);
        assert_eq!(distribution_rank(&[], &env, 2).unwrap(), 4);
    }

    #[test]
    fn rank_is_reported_per_sheet() {
        // 1 + j vanishes on the minus sheet.
        let env = EvalEnvironment::new();
        let w = ConstraintForm::parse(&["1 + J"], &["0"], H).unwrap();
        assert_eq!(distribution_rank_per_sheet(std::slice::from_ref(&w), &env, 1).unwrap(), (1, 2));
        assert_eq!(distribution_rank(&[w], &env, 1).unwrap(), 1);
    }

    #[test]
    fn classify_examples() {
        let s2 = samples(2, 2, 12);
        let dz1 = ConstraintForm::parse(&["1", "0"], &["0", "0"], H).unwrap();
        assert_eq!(classify(&[dz1], &s2, IND).unwrap().verdict, Verdict::Holonomic);

        let w = ConstraintForm::parse(&["0", "1"], &["-z1", "0"], H).unwrap();
        let v = classify(std::slice::from_ref(&w), &s2, IND).unwrap();
        assert_eq!(v.verdict, Verdict::Anholonomic);
        assert!(v.witness.value > 1e-6);
        assert_eq!(v.samples_tested, 12);

        let w2 = ConstraintForm::parse(&["z1", "0"], &["0", "0"], H).unwrap();
        assert_eq!(classify(&[w2], &s2, IND).unwrap().verdict, Verdict::Holonomic);
    }

    #[test]
    fn worked_wedge_is_minus_dz2_dz1_dzb1() {
        let w = ConstraintForm::parse(&["0", "1"], &["-z1", "0"], H).unwrap().one_form();
        let env = &samples(2, 3, 1)[0];
        let omega = FormValue::from_one(&w.evaluate(env).unwrap());
        let d = FormValue::from_two(&exterior_derivative(&w, IND).evaluate(env).unwrap());
        let wedge = omega.wedge(&d);
        // −dz2∧dz1∧dzb1 = +dz1∧dz2∧dzb1; basis bits dz1=0, dz2=1, dzb1=2.
        assert_eq!(wedge.terms.len(), 1);
        assert_eq!(wedge.terms[&0b0111], ParaNumber::ONE);
        assert_eq!(wedge.degree, 3);
    }

    #[test]
    fn classify_preconditions() {
        let dz1 = ConstraintForm::parse(&["1"], &["0"], H).unwrap();
        assert_eq!(
            classify(std::slice::from_ref(&dz1), &samples(1, 4, 9), IND),
            Err(ConstraintError::TooFewSamples(9))
        );
        assert_eq!(
            classify(&[dz1.clone(), dz1], &samples(1, 4, 10), IND),
            Err(ConstraintError::DimensionTooSmall { basis: 2, r: 2 })
        );
    }

    #[test]
    fn exact_forms_are_holonomic() {
        let s = samples(2, 5, 15);
        for text in ["z1*zb1 + z2*zb2", "z1*zb1 + z2*zb2 + z1^2*zb2", "exp(z1*zb2) + z2^3"] {
            let df = OneForm::differential(&parse_expression(text).unwrap(), Chart::positions(2), IND);
            let w = ConstraintForm::new(df.z, df.zbar, H).unwrap();
            assert_eq!(classify(&[w], &s, IND).unwrap().verdict, Verdict::Holonomic, "{text}");
        }
    }

    #[test]
    fn lagrangian_flavor_uses_velocity_basis() {
        let w = ConstraintForm::parse(&["1"], &["z1"], ConstraintFlavor::Lagrangian).unwrap();
        let form = w.one_form();
        assert_eq!(form.chart, Chart::tangent(1));
        let value = form.evaluate(&samples(1, 6, 1)[0]).unwrap();
        assert_eq!(value.z[0], ParaNumber::ONE);
        assert_eq!(value.zbar, OneFormValue::zeros(2).zbar);
    }

    proptest! {
        #[test]
        fn verdict_is_scale_invariant(k in 2.0f64..5.0, seed in 0u64..1000) {
            let s = samples(2, seed, 10);
            let factor = parse_expression(&format!("{k:?} + z1*zb1")).unwrap();
            for (a, b) in [(["0", "1"], ["-z1", "0"]), (["1", "0"], ["0", "0"]), (["zb2", "0"], ["0", "zb1"])] {
                let w = ConstraintForm::parse(&a, &b, H).unwrap();
                let before = classify(std::slice::from_ref(&w), &s, IND).unwrap().verdict;
                let after = classify(&[w.scaled(&factor)], &s, IND).unwrap().verdict;
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn rank_ignores_row_scaling_and_order(k in 0.5f64..4.0, seed in 0u64..1000) {
            let env = &samples(2, seed, 1)[0];
            let rows = [
                ConstraintForm::parse(&["1", "z2"], &["0", "0"], H).unwrap(),
                ConstraintForm::parse(&["0", "zb1"], &["z1", "0"], H).unwrap(),
            ];
            let base = distribution_rank(&rows, env, 2).unwrap();
            let scaled = [rows[1].scaled(&Expr::constant(k)), rows[0].clone()];
            prop_assert_eq!(base, distribution_rank(&scaled, env, 2).unwrap());
        }
    }
}
