//! Constrained paracomplex Hamiltonian flow.
//!
//! The unconstrained field is `Z_H = −j H_zb ∂/∂z + j H_z ∂/∂zb`. Each
//! constraint `ω_a = A dz + B dzb` contributes `Z_a = −j B ∂/∂z + j A ∂/∂zb`
//! weighted by a multiplier, and the multipliers solve
//! `Σ_b C_ab Λ_b = r_a` with
//! `C_ab = Σ_i B_a A_b − A_a B_b` and `r_a = Σ_i A_a H_zb − B_a H_z`,
//! which is `ω_a(Z) = 0` after cancelling the common factor `−j`.
//!
//! `z` and `zb` are integrated as independent quantities; the distance
//! between `zb` and `conj(z)` is reported as the conjugation defect.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{wirtinger_derivative, DerivativeConvention};
use crate::constraints::{ConstraintFlavor, ConstraintForm};
use crate::coords::{parse_coordinate, Slot, SlotKind, Which};
use crate::expr::{EvalEnvironment, Expr};
use crate::forms::VectorFieldValue;
use crate::integrate::{advance, DynamicsError, Method};
use crate::linalg::{merge_vectors, numerical_rank, split_matrix, split_vector};
use crate::para::{NullComponent, ParaNumber};

const RANK_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    m: usize,
    h: Expr,
    constraints: Vec<ConstraintForm>,
    convention: DerivativeConvention,
    fixed: Vec<(String, ParaNumber)>,
    h_z: Vec<Expr>,
    h_zbar: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianState {
    pub t: f64,
    pub z: Vec<ParaNumber>,
    pub zbar: Vec<ParaNumber>,
}

impl HamiltonianState {
    pub fn new(t: f64, z: Vec<ParaNumber>, zbar: Vec<ParaNumber>) -> Self {
        assert_eq!(z.len(), zbar.len(), "state halves must have equal length");
        Self { t, z, zbar }
    }

    /// State with `zbar = conj(z)`.
    pub fn conjugate(t: f64, z: Vec<ParaNumber>) -> Self {
        let zbar = z.iter().map(|v| v.conj()).collect();
        Self { t, z, zbar }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `max_i |zbar_i − conj(z_i)|`.
    pub fn conjugation_defect(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.zbar)
            .map(|(z, zb)| (*zb - z.conj()).max_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.iter().chain(&self.zbar).all(|v| v.is_finite())
    }

    fn flatten(&self) -> Vec<ParaNumber> {
        self.z.iter().chain(&self.zbar).copied().collect()
    }

    fn from_flat(t: f64, y: &[ParaNumber]) -> Self {
        let m = y.len() / 2;
        Self::new(t, y[..m].to_vec(), y[m..].to_vec())
    }
}

/// Multipliers and whether any sheet needed the minimum-norm fallback.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiplierSolution {
    pub lambda: Vec<ParaNumber>,
    pub first_class: bool,
}

/// Total field with the multipliers that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSolution {
    pub field: VectorFieldValue,
    pub multipliers: MultiplierSolution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: HamiltonianState,
    pub first_class: bool,
}

fn check_coordinates(text_owner: &str, e: &Expr, m: usize, fixed: &[(String, ParaNumber)]) -> Result<(), DynamicsError> {
    for name in e.coordinates() {
        if fixed.iter().any(|(n, _)| *n == name) {
            continue;
        }
        match parse_coordinate(&name) {
            Some((slot, _)) if slot.kind == SlotKind::Position && slot.index <= m => {}
            _ => {
                return Err(DynamicsError::Invalid(format!(
                    "{text_owner} references `{name}`, which is not a coordinate of dimension {m}"
                )))
            }
        }
    }
    Ok(())
}

impl HamiltonianSystem {
    pub fn new(
        m: usize,
        h: Expr,
        constraints: Vec<ConstraintForm>,
        convention: DerivativeConvention,
    ) -> Result<Self, DynamicsError> {
        Self::with_fixed(m, h, constraints, convention, Vec::new())
    }

    /// `fixed` binds extra names (for example velocity slots appearing in
    /// `H`) to constants for the whole run.
    pub fn with_fixed(
        m: usize,
        h: Expr,
        constraints: Vec<ConstraintForm>,
        convention: DerivativeConvention,
        fixed: Vec<(String, ParaNumber)>,
    ) -> Result<Self, DynamicsError> {
        if m == 0 {
            return Err(DynamicsError::Invalid("dimension must be positive".into()));
        }
        if constraints.len() > 2 * m {
            return Err(DynamicsError::Invalid(format!(
                "{} constraints exceed 2m = {}",
                constraints.len(),
                2 * m
            )));
        }
        check_coordinates("H", &h, m, &fixed)?;
        for (k, c) in constraints.iter().enumerate() {
            if c.flavor != ConstraintFlavor::Hamiltonian || c.dim() != m {
                return Err(DynamicsError::Invalid(format!(
                    "constraint {} must be a Hamiltonian form of dimension {m}",
                    k + 1
                )));
            }
            for e in c.a.iter().chain(&c.b) {
                check_coordinates(&format!("constraint {}", k + 1), e, m, &fixed)?;
            }
        }
        let slots: Vec<Slot> = (1..=m).map(Slot::position).collect();
        let h_z = slots
            .iter()
            .map(|&s| wirtinger_derivative(&h, s, Which::Z, convention))
            .collect();
        let h_zbar = slots
            .iter()
            .map(|&s| wirtinger_derivative(&h, s, Which::ZBar, convention))
            .collect();
        Ok(Self {
            m,
            h,
            constraints,
            convention,
            fixed,
            h_z,
            h_zbar,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn constraints(&self) -> &[ConstraintForm] {
        &self.constraints
    }

    pub fn convention(&self) -> DerivativeConvention {
        self.convention
    }

    /// `∂H/∂z_i` and `∂H/∂zb_i` trees under the system convention.
    pub fn gradients(&self) -> (&[Expr], &[Expr]) {
        (&self.h_z, &self.h_zbar)
    }

    pub fn environment(&self, state: &HamiltonianState) -> EvalEnvironment {
        assert_eq!(state.dim(), self.m, "state dimension mismatch");
        let mut env = EvalEnvironment::with_time(state.t);
        for (name, v) in &self.fixed {
            env.bind(name.clone(), *v);
        }
        for i in 0..self.m {
            env.bind_slot(Slot::position(i + 1), state.z[i], state.zbar[i]);
        }
        env
    }

    pub fn energy(&self, state: &HamiltonianState) -> Result<ParaNumber, DynamicsError> {
        Ok(self.h.evaluate(&self.environment(state))?)
    }

    fn gradient_values(&self, env: &EvalEnvironment) -> Result<(Vec<ParaNumber>, Vec<ParaNumber>), DynamicsError> {
        let eval = |es: &[Expr]| es.iter().map(|e| e.evaluate(env)).collect::<Result<Vec<_>, _>>();
        Ok((eval(&self.h_z)?, eval(&self.h_zbar)?))
    }

    /// `(C, r)` at `state`.
    pub fn multiplier_system(
        &self,
        state: &HamiltonianState,
    ) -> Result<(Vec<Vec<ParaNumber>>, Vec<ParaNumber>), DynamicsError> {
        let env = self.environment(state);
        let (hz, hzb) = self.gradient_values(&env)?;
        let coeffs = self
            .constraints
            .iter()
            .map(|c| c.coefficients(&env))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(assemble_multiplier_system(&coeffs, &hz, &hzb))
    }

    pub fn solve_multipliers(&self, state: &HamiltonianState) -> Result<MultiplierSolution, DynamicsError> {
        let (c, r) = self.multiplier_system(state)?;
        solve_multiplier_system(&c, &r)
    }

    pub fn total_field(&self, state: &HamiltonianState) -> Result<FieldSolution, DynamicsError> {
        let env = self.environment(state);
        let (hz, hzb) = self.gradient_values(&env)?;
        let coeffs = self
            .constraints
            .iter()
            .map(|c| c.coefficients(&env))
            .collect::<Result<Vec<_>, _>>()?;
        let (c, r) = assemble_multiplier_system(&coeffs, &hz, &hzb);
        let (lp, lm, first_class) = solve_sheets(&c, &r)?;
        let multipliers = MultiplierSolution {
            lambda: merge_vectors(&lp, &lm),
            first_class,
        };

        // Assemble per null sheet: −j acts as −1 on e⁺ and +1 on e⁻.
        let mut sheets = Vec::with_capacity(2);
        for (sign, lam, pick) in [(-1.0, &lp, true), (1.0, &lm, false)] {
            let comp = |v: ParaNumber| {
                let s = v.null_split();
                if pick {
                    s.plus
                } else {
                    s.minus
                }
            };
            let mut zc = DVector::zeros(self.m);
            let mut zbc = DVector::zeros(self.m);
            for i in 0..self.m {
                let mut w_z = comp(hzb[i]);
                let mut w_zb = comp(hz[i]);
                for (a, (ca, cb)) in coeffs.iter().enumerate() {
                    w_z += lam[a] * comp(cb[i]);
                    w_zb += lam[a] * comp(ca[i]);
                }
                zc[i] = sign * w_z;
                zbc[i] = -sign * w_zb;
            }
            sheets.push((zc, zbc));
        }
        let field = VectorFieldValue::new(
            merge_vectors(&sheets[0].0, &sheets[1].0),
            merge_vectors(&sheets[0].1, &sheets[1].1),
        );
        Ok(FieldSolution { field, multipliers })
    }

    /// The unconstrained field `Z_H`.
    pub fn hamiltonian_field(&self, state: &HamiltonianState) -> Result<VectorFieldValue, DynamicsError> {
        let (hz, hzb) = self.gradient_values(&self.environment(state))?;
        Ok(VectorFieldValue::new(
            hzb.iter().map(|&v| -ParaNumber::J * v).collect(),
            hz.iter().map(|&v| ParaNumber::J * v).collect(),
        ))
    }

    /// `max_a |ω_a(v)|` at `state`.
    pub fn constraint_residuals(
        &self,
        state: &HamiltonianState,
        v: &VectorFieldValue,
    ) -> Result<Vec<ParaNumber>, DynamicsError> {
        let env = self.environment(state);
        self.constraints
            .iter()
            .map(|c| Ok(crate::constraints::residual(c, v, &env)?))
            .collect()
    }

    pub fn step(&self, state: &HamiltonianState, dt: f64, method: Method) -> Result<StepOutcome, DynamicsError> {
        let mut first_class = false;
        let y = advance(state.t, &state.flatten(), dt, method, |t, y| {
            let s = HamiltonianState::from_flat(t, y);
            let sol = self.total_field(&s)?;
            first_class |= sol.multipliers.first_class;
            Ok(sol.field.z.into_iter().chain(sol.field.zbar).collect())
        })?;
        Ok(StepOutcome {
            state: HamiltonianState::from_flat(state.t + dt, &y),
            first_class,
        })
    }

    /// `Σ_a |ω_a(Δstate/dt)|` with coefficients at the midpoint.
    pub fn finite_drift(
        &self,
        before: &HamiltonianState,
        after: &HamiltonianState,
        dt: f64,
    ) -> Result<f64, DynamicsError> {
        let mid = |a: &[ParaNumber], b: &[ParaNumber]| -> Vec<ParaNumber> {
            a.iter().zip(b).map(|(x, y)| (*x + *y).scale(0.5)).collect()
        };
        let rate = |a: &[ParaNumber], b: &[ParaNumber]| -> Vec<ParaNumber> {
            a.iter().zip(b).map(|(x, y)| (*y - *x).scale(1.0 / dt)).collect()
        };
        let midpoint = HamiltonianState::new(
            0.5 * (before.t + after.t),
            mid(&before.z, &after.z),
            mid(&before.zbar, &after.zbar),
        );
        let v = VectorFieldValue::new(rate(&before.z, &after.z), rate(&before.zbar, &after.zbar));
        Ok(self
            .constraint_residuals(&midpoint, &v)?
            .iter()
            .fold(0.0, |acc, r| acc + r.max_abs()))
    }
}

type Coefficients = (Vec<ParaNumber>, Vec<ParaNumber>);

fn assemble_multiplier_system(
    coeffs: &[Coefficients],
    hz: &[ParaNumber],
    hzb: &[ParaNumber],
) -> (Vec<Vec<ParaNumber>>, Vec<ParaNumber>) {
    let s = coeffs.len();
    let mut c = vec![vec![ParaNumber::ZERO; s]; s];
    let mut r = vec![ParaNumber::ZERO; s];
    for a in 0..s {
        let (aa, ba) = &coeffs[a];
        for b in a + 1..s {
            let (ab, bb) = &coeffs[b];
            let v: ParaNumber = (0..hz.len()).map(|i| ba[i] * ab[i] - aa[i] * bb[i]).sum();
            c[a][b] = v;
            c[b][a] = -v;
        }
        r[a] = (0..hz.len()).map(|i| aa[i] * hzb[i] - ba[i] * hz[i]).sum();
    }
    (c, r)
}

fn solve_sheet(c: DMatrix<f64>, r: DVector<f64>, sheet: NullComponent) -> Result<(DVector<f64>, bool), DynamicsError> {
    let s = r.len();
    if numerical_rank(&c, RANK_TOL) == s {
        if let Some(x) = c.clone().lu().solve(&r) {
            return Ok((x, false));
        }
    }
    let svd = c.clone().svd(true, true);
    let eps = RANK_TOL * svd.singular_values.max().max(1.0);
    let x = svd
        .solve(&r, eps)
        .map_err(|msg| DynamicsError::Invalid(msg.to_string()))?;
    let residual = (&c * &x - &r).amax();
    if residual <= RANGE_TOL * r.amax().max(1.0) {
        Ok((x, true))
    } else {
        Err(DynamicsError::InconsistentConstraint { sheet, measure: residual })
    }
}

/// Solve `C Λ = r` sheet by sheet; singular `C` with consistent `r` gives
/// the minimum-norm solution and sets `first_class`.
pub fn solve_multiplier_system(
    c: &[Vec<ParaNumber>],
    r: &[ParaNumber],
) -> Result<MultiplierSolution, DynamicsError> {
    let (xp, xm, first_class) = solve_sheets(c, r)?;
    Ok(MultiplierSolution {
        lambda: merge_vectors(&xp, &xm),
        first_class,
    })
}

fn solve_sheets(c: &[Vec<ParaNumber>], r: &[ParaNumber]) -> Result<(DVector<f64>, DVector<f64>, bool), DynamicsError> {
    if r.is_empty() {
        return Ok((DVector::zeros(0), DVector::zeros(0), false));
    }
    let (cp, cm) = split_matrix(c, r.len());
    let (rp, rm) = split_vector(r);
    let (xp, fp) = solve_sheet(cp, rp, NullComponent::Plus)?;
    let (xm, fm) = solve_sheet(cm, rm, NullComponent::Minus)?;
    Ok((xp, xm, fp || fm))
}

/// `Z_a = −j B ∂/∂z + j A ∂/∂zb`.
pub fn constraint_field(omega: &ConstraintForm, env: &EvalEnvironment) -> Result<VectorFieldValue, DynamicsError> {
    let (a, b) = omega.coefficients(env)?;
    Ok(VectorFieldValue::new(
        b.iter().map(|&v| -ParaNumber::J * v).collect(),
        a.iter().map(|&v| ParaNumber::J * v).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::forms::{canonical_structures, interior_product, OneForm};
    use crate::para::NullPair;
    use rand::{Rng, SeedableRng};

    const IND: DerivativeConvention = DerivativeConvention::Independent;
    const H: ConstraintFlavor = ConstraintFlavor::Hamiltonian;

    fn p(re: f64, jm: f64) -> ParaNumber {
        ParaNumber::new(re, jm)
    }

    fn system(h: &str, constraints: &[(&[&str], &[&str])]) -> HamiltonianSystem {
        let cs = constraints
            .iter()
            .map(|(a, b)| ConstraintForm::parse(a, b, H).unwrap())
            .collect();
        HamiltonianSystem::new(constraints.first().map_or(1, |c| c.0.len()), parse_expression(h).unwrap(), cs, IND)
            .unwrap()
    }

    #[test]
    fn hamiltonian_field_examples() {
        let sys = system("z1*zb1", &[]);
        let st = HamiltonianState::conjugate(0.0, vec![ParaNumber::ONE]);
        let f = sys.hamiltonian_field(&st).unwrap();
        assert_eq!(f.z[0], p(0.0, -1.0));
        assert_eq!(f.zbar[0], p(0.0, 1.0));
        let sys = system("7 + J", &[]);
        assert_eq!(sys.hamiltonian_field(&st).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_field_contracts_to_dh() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let sys = HamiltonianSystem::new(
            2,
            parse_expression("z1*zb1 + z2^2*zb1 + exp(zb2)").unwrap(),
            Vec::new(),
            IND,
        )
        .unwrap();
        let (_, phi) = canonical_structures(2);
        let dh = OneForm::differential(sys.hamiltonian(), crate::coords::Chart::positions(2), IND);
        for _ in 0..50 {
            let z: Vec<_> = (0..2).map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let st = HamiltonianState::conjugate(0.0, z);
            let env = sys.environment(&st);
            let lhs = interior_product(&sys.hamiltonian_field(&st).unwrap(), &phi, &env).unwrap();
            let rhs = dh.evaluate(&env).unwrap();
            assert!(lhs.max_deviation(&rhs) <= 1e-10);
        }
    }

    #[test]
    fn constraint_field_examples() {
        let env = EvalEnvironment::new();
        let dz = ConstraintForm::parse(&["1"], &["0"], H).unwrap();
        let f = constraint_field(&dz, &env).unwrap();
        assert_eq!((f.z[0], f.zbar[0]), (ParaNumber::ZERO, ParaNumber::J));
        let dzb = ConstraintForm::parse(&["0"], &["1"], H).unwrap();
        let f = constraint_field(&dzb, &env).unwrap();
        assert_eq!((f.z[0], f.zbar[0]), (p(0.0, -1.0), ParaNumber::ZERO));
    }

    #[test]
    fn single_constraint_is_inconsistent() {
        let sys = system("z1*zb1", &[(&["1"], &["0"])]);
        let st = HamiltonianState::conjugate(0.0, vec![ParaNumber::ONE]);
        let (c, r) = sys.multiplier_system(&st).unwrap();
        assert_eq!(c, vec![vec![ParaNumber::ZERO]]);
        assert_eq!(r, vec![ParaNumber::ONE]);
        assert!(matches!(
            sys.solve_multipliers(&st),
            Err(DynamicsError::InconsistentConstraint { .. })
        ));
    }

    #[test]
    fn frozen_pair_of_constraints() {
        let sys = system("z1*zb1", &[(&["1"], &["0"]), (&["0"], &["1"])]);
        let z = p(0.7, -0.2);
        let st = HamiltonianState::conjugate(0.0, vec![z]);
        let (c, r) = sys.multiplier_system(&st).unwrap();
        assert_eq!(c, vec![vec![ParaNumber::ZERO, -ParaNumber::ONE], vec![ParaNumber::ONE, ParaNumber::ZERO]]);
        assert_eq!(r, vec![z, -z.conj()]);
        let sol = sys.total_field(&st).unwrap();
        assert!((sol.multipliers.lambda[0] + z.conj()).max_abs() < 1e-15);
        assert!((sol.multipliers.lambda[1] + z).max_abs() < 1e-15);
        assert_eq!(sol.field.max_abs(), 0.0);
        let next = sys.step(&st, 1e-3, Method::Rk4).unwrap().state;
        assert_eq!((next.z, next.zbar), (st.z, st.zbar));
    }

    #[test]
    fn no_constraints_total_field_equals_hamiltonian_field() {
        let sys = system("z1^3*zb1 - J*zb1", &[]);
        let st = HamiltonianState::new(0.0, vec![p(0.4, 0.1)], vec![p(0.3, -0.3)]);
        let a = sys.total_field(&st).unwrap().field;
        let b = sys.hamiltonian_field(&st).unwrap();
        for (x, y) in a.z.iter().chain(&a.zbar).zip(b.z.iter().chain(&b.zbar)) {
            assert!((*x - *y).max_abs() <= 1e-15 * y.max_abs().max(1.0));
        }
    }

    #[test]
    fn solved_field_annihilates_constraints() {
        let sys = HamiltonianSystem::new(
            2,
            parse_expression("z1*zb1 + z2*zb2 + z1*z2").unwrap(),
            vec![
                ConstraintForm::parse(&["0", "1"], &["-z1", "0"], H).unwrap(),
                ConstraintForm::parse(&["-zb1", "0"], &["0", "1"], H).unwrap(),
            ],
            IND,
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let z: Vec<_> = (0..2).map(|_| p(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3))).collect();
            let st = HamiltonianState::conjugate(0.0, z);
            let (c, _) = sys.multiplier_system(&st).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(c[a][b] + c[b][a], ParaNumber::ZERO);
                }
            }
            let f = sys.total_field(&st).unwrap().field;
            for r in sys.constraint_residuals(&st, &f).unwrap() {
                assert!(r.max_abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn proposition_round_trip() {
        let (_, phi) = canonical_structures(2);
        let omega = ConstraintForm::parse(&["z2*zb1", "3 - J*z1"], &["exp(zb2)", "z1^2"], H).unwrap();
        let form = omega.one_form();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let z: Vec<_> = (0..2).map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let env = HamiltonianState::conjugate(0.0, z);
            let mut e = EvalEnvironment::new();
            for i in 0..2 {
                e.bind_slot(Slot::position(i + 1), env.z[i], env.zbar[i]);
            }
            let za = constraint_field(&omega, &e).unwrap();
            let lhs = interior_product(&za, &phi, &e).unwrap();
            assert!(lhs.max_deviation(&form.evaluate(&e).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn quadratic_flow_matches_closed_form() {
        let sys = system("z1*zb1", &[]);
        let z0 = p(0.8, 0.3);
        let mut st = HamiltonianState::conjugate(0.0, vec![z0]);
        let h0 = sys.energy(&st).unwrap();
        for _ in 0..1000 {
            st = sys.step(&st, 1e-3, Method::Rk4).unwrap().state;
        }
        let u0 = z0.null_split();
        let want = NullPair::new(u0.plus * (-1.0f64).exp(), u0.minus * 1.0f64.exp()).merge();
        assert!((st.z[0] - want).max_abs() <= 1e-9 * want.max_abs());
        assert!((sys.energy(&st).unwrap() - h0).max_abs() <= 1e-8);
    }

    #[test]
    fn constant_hamiltonian_freezes_state() {
        let sys = system("2.5", &[]);
        let st = HamiltonianState::conjugate(0.0, vec![p(0.1, 0.2)]);
        let next = sys.step(&st, 0.1, Method::Euler).unwrap().state;
        assert_eq!(next.z, st.z);
        assert_eq!(next.t, 0.1);
    }

    #[test]
    fn undeclared_coordinates_are_rejected() {
        let err = HamiltonianSystem::new(1, parse_expression("z2*zb1").unwrap(), Vec::new(), IND).unwrap_err();
        assert!(matches!(err, DynamicsError::Invalid(_)));
        let ok = HamiltonianSystem::with_fixed(
            1,
            parse_expression("zd1*zb1").unwrap(),
            Vec::new(),
            IND,
            vec![("zd1".into(), ParaNumber::ONE)],
        );
        assert!(ok.is_ok());
    }
}
