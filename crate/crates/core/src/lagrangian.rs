//! Constrained paracomplex Euler–Lagrange flow.
//!
//! Phase space is `(z, zb, zd, zdb)`, each slot integrated on its own, with
//! the formal derivatives `∂/∂z` and `∂/∂zb` treating `z` and `zb` as
//! independent. Both equation families are solved together:
//!
//! ```text
//! L_z  − d/dt L_zd  = Σ_a Λ_a G^z_a  + Λ'_a G'^z_a
//! L_zb − d/dt L_zdb = Σ_a Λ_a G^zb_a + Λ'_a G'^zb_a
//! ```
//!
//! where each constraint row `G^z·z̈ + G^zb·zb̈ + h = 0` comes from the
//! constraint `ω_a(ξ) = 0` (differentiated once in time when it is
//! velocity-level), and the primed row and multiplier belong to its
//! conjugate mirror. The paracomplex saddle system splits into two real
//! saddle systems on the null sheets, each solved by LU.

use nalgebra::{DMatrix, DVector};

use crate::calculus::{wirtinger_derivative, DerivativeConvention, DerivativeTable, Direction};
use crate::constraints::{ConstraintFlavor, ConstraintForm};
use crate::coords::{parse_coordinate, Chart, Slot, Which};
use crate::expr::{simplify, EvalEnvironment, Expr};
use crate::forms::{apply_j, exterior_derivative, interior_product_value, OneForm, TwoForm, VectorFieldValue};
use crate::integrate::{advance, DynamicsError, Method};
use crate::linalg::{merge_vectors, numerical_rank, split_matrix, split_vector};
use crate::para::{NullComponent, ParaNumber};

const IND: DerivativeConvention = DerivativeConvention::Independent;
const RANK_TOL: f64 = 1e-10;

/// `V = Jξ`.
pub fn liouville_field(xi: &VectorFieldValue) -> VectorFieldValue {
    apply_j(xi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianState {
    pub t: f64,
    pub z: Vec<ParaNumber>,
    pub zbar: Vec<ParaNumber>,
    pub zdot: Vec<ParaNumber>,
    pub zbardot: Vec<ParaNumber>,
}

impl LagrangianState {
    pub fn new(
        t: f64,
        z: Vec<ParaNumber>,
        zbar: Vec<ParaNumber>,
        zdot: Vec<ParaNumber>,
        zbardot: Vec<ParaNumber>,
    ) -> Self {
        let m = z.len();
        assert!(
            zbar.len() == m && zdot.len() == m && zbardot.len() == m,
            "state blocks must have equal length"
        );
        Self {
            t,
            z,
            zbar,
            zdot,
            zbardot,
        }
    }

    /// State with the barred slots set to conjugates.
    pub fn conjugate(t: f64, z: Vec<ParaNumber>, zdot: Vec<ParaNumber>) -> Self {
        let zbar = z.iter().map(|v| v.conj()).collect();
        let zbardot = zdot.iter().map(|v| v.conj()).collect();
        Self::new(t, z, zbar, zdot, zbardot)
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `max_i` of `|zb_i − conj(z_i)|` and `|zdb_i − conj(zd_i)|`.
    pub fn conjugation_defect(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.zbar)
            .chain(self.zdot.iter().zip(&self.zbardot))
            .map(|(z, zb)| (*zb - z.conj()).max_abs())
            .fold(0.0, f64::max)
    }

    fn flatten(&self) -> Vec<ParaNumber> {
        [&self.z, &self.zbar, &self.zdot, &self.zbardot]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    fn from_flat(t: f64, y: &[ParaNumber]) -> Self {
        let m = y.len() / 4;
        Self::new(
            t,
            y[..m].to_vec(),
            y[m..2 * m].to_vec(),
            y[2 * m..3 * m].to_vec(),
            y[3 * m..].to_vec(),
        )
    }
}

/// One acceleration-level constraint row in symbolic form.
#[derive(Clone, Debug)]
struct RowExprs {
    gz: Vec<Expr>,
    gzb: Vec<Expr>,
    h: Expr,
}

/// Numeric blocks of the saddle system at one state. Family rows are
/// ordered `z_1..z_m, zb_1..zb_m`; acceleration columns likewise.
#[derive(Clone, Debug, PartialEq)]
pub struct ElBlocks {
    /// `∂²L/∂v_f ∂v_k` for velocity slots `v = (zd, zdb)`.
    pub mass: Vec<Vec<ParaNumber>>,
    /// `∂²L/∂v_f ∂q_k` for position slots `q = (z, zb)`.
    pub coupling: Vec<Vec<ParaNumber>>,
    /// `∂L/∂q`.
    pub grad_position: Vec<ParaNumber>,
    /// `∂L/∂v`.
    pub grad_velocity: Vec<ParaNumber>,
    /// Constraint rows, originals first and then their mirrors.
    pub constraint_rows: Vec<Vec<ParaNumber>>,
    /// `−h` for every constraint row.
    pub constraint_rhs: Vec<ParaNumber>,
    /// `∂L/∂q − coupling·v`.
    pub dynamics_rhs: Vec<ParaNumber>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElSolveResult {
    pub zddot: Vec<ParaNumber>,
    pub zbarddot: Vec<ParaNumber>,
    pub multipliers: Vec<ParaNumber>,
    pub mirror_multipliers: Vec<ParaNumber>,
    /// Max residual of the assembled saddle system.
    pub primary_residual: f64,
    /// Max residual of the two equation families in their literal
    /// `L_z + j d/dt L_z = Λ a`, `L_zd − j d/dt L_zd = Λ b` form.
    pub secondary_residual: f64,
}

#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    m: usize,
    l: Expr,
    constraints: Vec<ConstraintForm>,
    convention: DerivativeConvention,
    table: DerivativeTable,
    energy: Expr,
    d_energy: OneForm,
    phi_l: TwoForm,
    rows: Vec<RowExprs>,
    literal_z: Vec<Expr>,
    literal_zd: Vec<Expr>,
    literal_z_rates: Vec<Vec<Expr>>,
    literal_zd_rates: Vec<Vec<Expr>>,
}

/// Directions `z_1..m, zb_1..m, zd_1..m, zdb_1..m`.
fn directions(m: usize) -> Vec<Direction> {
    let mut dirs = Vec::with_capacity(4 * m);
    for (kind, which) in [
        (Slot::position as fn(usize) -> Slot, Which::Z),
        (Slot::position, Which::ZBar),
        (Slot::velocity, Which::Z),
        (Slot::velocity, Which::ZBar),
    ] {
        dirs.extend((1..=m).map(|i| (kind(i), which)));
    }
    dirs
}

fn constraint_row(c: &ConstraintForm, target: Which, m: usize) -> RowExprs {
    let vel = |i: usize, w: Which| Expr::slot(Slot::velocity(i + 1), w);
    let d = |e: &Expr, s: Slot, w: Which| wirtinger_derivative(e, s, w, IND);
    let (own, other, h) = if c.b.iter().all(Expr::is_zero) {
        // d/dt Σ a_i v_i with v the target velocities.
        let acc_coeff = |k: usize, w: Which| {
            let chain = (0..m).map(|i| Expr::mul(vel(i, target), d(&c.a[i], Slot::velocity(k + 1), w)));
            let base = if w == target { c.a[k].clone() } else { Expr::zero() };
            simplify(&Expr::add(base, Expr::sum(chain)))
        };
        let own = (0..m).map(|k| acc_coeff(k, target)).collect();
        let other = (0..m).map(|k| acc_coeff(k, target.flip())).collect();
        let h = Expr::sum((0..m).map(|i| {
            let rate = (0..m).flat_map(|k| {
                [Which::Z, Which::ZBar].map(|w| Expr::mul(d(&c.a[i], Slot::position(k + 1), w), vel(k, w)))
            });
            Expr::mul(vel(i, target), Expr::sum(rate))
        }));
        (own, other, simplify(&h))
    } else {
        let h = Expr::sum((0..m).map(|i| Expr::mul(c.a[i].clone(), vel(i, target))));
        (c.b.clone(), vec![Expr::zero(); m], simplify(&h))
    };
    match target {
        Which::Z => RowExprs { gz: own, gzb: other, h },
        Which::ZBar => RowExprs { gz: other, gzb: own, h },
    }
}

fn check_coordinates(owner: &str, e: &Expr, m: usize) -> Result<(), DynamicsError> {
    for name in e.coordinates() {
        match parse_coordinate(&name) {
            Some((slot, _)) if slot.index <= m => {}
            _ => {
                return Err(DynamicsError::Invalid(format!(
                    "{owner} references `{name}`, which is not a coordinate of dimension {m}"
                )))
            }
        }
    }
    Ok(())
}

fn eval_all(es: &[Expr], env: &EvalEnvironment) -> Result<Vec<ParaNumber>, DynamicsError> {
    Ok(es.iter().map(|e| e.evaluate(env)).collect::<Result<Vec<_>, _>>()?)
}

impl LagrangianSystem {
    pub fn new(
        m: usize,
        l: Expr,
        constraints: Vec<ConstraintForm>,
        convention: DerivativeConvention,
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
        check_coordinates("L", &l, m)?;
        for (k, c) in constraints.iter().enumerate() {
            if c.flavor != ConstraintFlavor::Lagrangian || c.dim() != m {
                return Err(DynamicsError::Invalid(format!(
                    "constraint {} must be a Lagrangian form of dimension {m}",
                    k + 1
                )));
            }
            for e in c.a.iter().chain(&c.b) {
                check_coordinates(&format!("constraint {}", k + 1), e, m)?;
            }
        }

        let dirs = directions(m);
        let table = DerivativeTable::second_order(&l, dirs.clone(), IND);
        let vel_grad = |i: usize| table.grad[2 * m + i].clone();
        let energy = simplify(&Expr::sub(
            Expr::sum((0..2 * m).map(|i| Expr::mul(Expr::slot(dirs[2 * m + i].0, dirs[2 * m + i].1), vel_grad(i)))),
            l.clone(),
        ));

        let chart = Chart::tangent(m);
        let mut theta = OneForm::zero(chart.clone());
        for i in 0..m {
            theta.z[i] = vel_grad(i);
            theta.zbar[i] = vel_grad(m + i);
        }
        let phi_l = exterior_derivative(&theta, IND).negated();
        let d_energy = OneForm::differential(&energy, chart, IND);

        let mut rows: Vec<RowExprs> = constraints.iter().map(|c| constraint_row(c, Which::Z, m)).collect();
        rows.extend(
            constraints
                .iter()
                .map(|c| constraint_row(&c.conjugate_mirror(), Which::ZBar, m)),
        );

        let literal_z: Vec<Expr> = (1..=m)
            .map(|i| wirtinger_derivative(&l, Slot::position(i), Which::Z, convention))
            .collect();
        let literal_zd: Vec<Expr> = (1..=m)
            .map(|i| wirtinger_derivative(&l, Slot::velocity(i), Which::Z, convention))
            .collect();
        let rates = |es: &[Expr]| -> Vec<Vec<Expr>> {
            es.iter()
                .map(|e| dirs.iter().map(|&(s, w)| wirtinger_derivative(e, s, w, IND)).collect())
                .collect()
        };
        let literal_z_rates = rates(&literal_z);
        let literal_zd_rates = rates(&literal_zd);

        Ok(Self {
            m,
            l,
            constraints,
            convention,
            table,
            energy,
            d_energy,
            phi_l,
            rows,
            literal_z,
            literal_zd,
            literal_z_rates,
            literal_zd_rates,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.l
    }

    pub fn constraints(&self) -> &[ConstraintForm] {
        &self.constraints
    }

    pub fn convention(&self) -> DerivativeConvention {
        self.convention
    }

    /// `E_L = Σ zd_i L_zd_i + zdb_i L_zdb_i − L`.
    pub fn energy_expr(&self) -> &Expr {
        &self.energy
    }

    /// `Φ_L = −dθ_L` on the tangent chart, `θ_L = Σ L_zd_i dz_i + L_zdb_i dzb_i`.
    pub fn kahler_form(&self) -> &TwoForm {
        &self.phi_l
    }

    pub fn environment(&self, state: &LagrangianState) -> EvalEnvironment {
        assert_eq!(state.dim(), self.m, "state dimension mismatch");
        let mut env = EvalEnvironment::with_time(state.t);
        for i in 0..self.m {
            env.bind_slot(Slot::position(i + 1), state.z[i], state.zbar[i]);
            env.bind_slot(Slot::velocity(i + 1), state.zdot[i], state.zbardot[i]);
        }
        env
    }

    pub fn energy(&self, state: &LagrangianState) -> Result<ParaNumber, DynamicsError> {
        Ok(self.energy.evaluate(&self.environment(state))?)
    }

    pub fn assemble(&self, state: &LagrangianState) -> Result<ElBlocks, DynamicsError> {
        self.assemble_at(&self.environment(state), state)
    }

    fn assemble_at(&self, env: &EvalEnvironment, state: &LagrangianState) -> Result<ElBlocks, DynamicsError> {
        let m = self.m;
        let n = 2 * m;
        let vel: Vec<ParaNumber> = state.zdot.iter().chain(&state.zbardot).copied().collect();
        let mut mass = vec![vec![ParaNumber::ZERO; n]; n];
        let mut coupling = vec![vec![ParaNumber::ZERO; n]; n];
        let mut grad_position = Vec::with_capacity(n);
        let mut grad_velocity = Vec::with_capacity(n);
        let mut dynamics_rhs = Vec::with_capacity(n);
        for f in 0..n {
            let row = &self.table.hess[n + f];
            for k in 0..n {
                mass[f][k] = row[n + k].evaluate(env)?;
                coupling[f][k] = row[k].evaluate(env)?;
            }
            let gq = self.table.grad[f].evaluate(env)?;
            grad_position.push(gq);
            grad_velocity.push(self.table.grad[n + f].evaluate(env)?);
            let pull: ParaNumber = (0..n).map(|k| coupling[f][k] * vel[k]).sum();
            dynamics_rhs.push(gq - pull);
        }
        let mut constraint_rows = Vec::with_capacity(self.rows.len());
        let mut constraint_rhs = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let mut row = eval_all(&r.gz, env)?;
            row.extend(eval_all(&r.gzb, env)?);
            constraint_rows.push(row);
            constraint_rhs.push(-r.h.evaluate(env)?);
        }
        Ok(ElBlocks {
            mass,
            coupling,
            grad_position,
            grad_velocity,
            constraint_rows,
            constraint_rhs,
            dynamics_rhs,
        })
    }

    /// Accelerations and all multipliers, without the literal-family check.
    fn solve_core(&self, state: &LagrangianState) -> Result<(ElSolveResult, EvalEnvironment), DynamicsError> {
        let env = self.environment(state);
        let blocks = self.assemble_at(&env, state)?;
        let (x, primary_residual) = solve_blocks(&blocks)?;
        let m = self.m;
        let r = self.constraints.len();
        Ok((
            ElSolveResult {
                zddot: x[..m].to_vec(),
                zbarddot: x[m..2 * m].to_vec(),
                multipliers: x[2 * m..2 * m + r].to_vec(),
                mirror_multipliers: x[2 * m + r..].to_vec(),
                primary_residual,
                secondary_residual: 0.0,
            },
            env,
        ))
    }

    pub fn solve(&self, state: &LagrangianState) -> Result<ElSolveResult, DynamicsError> {
        let (mut result, env) = self.solve_core(state)?;
        result.secondary_residual = self.secondary_residual(&env, state, &result)?;
        Ok(result)
    }

    fn secondary_residual(
        &self,
        env: &EvalEnvironment,
        state: &LagrangianState,
        result: &ElSolveResult,
    ) -> Result<f64, DynamicsError> {
        let rates: Vec<ParaNumber> = [&state.zdot, &state.zbardot, &result.zddot, &result.zbarddot]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        let total = |grads: &[Expr]| -> Result<ParaNumber, DynamicsError> {
            let mut acc = ParaNumber::ZERO;
            for (g, r) in grads.iter().zip(&rates) {
                if !g.is_zero() {
                    acc += g.evaluate(env)? * *r;
                }
            }
            Ok(acc)
        };
        let coeffs = self
            .constraints
            .iter()
            .map(|c| c.coefficients(env))
            .collect::<Result<Vec<_>, _>>()?;
        let mut worst = 0.0_f64;
        for i in 0..self.m {
            let force_a: ParaNumber = coeffs.iter().zip(&result.multipliers).map(|((a, _), l)| *l * a[i]).sum();
            let force_b: ParaNumber = coeffs.iter().zip(&result.multipliers).map(|((_, b), l)| *l * b[i]).sum();
            let first = self.literal_z[i].evaluate(env)? + ParaNumber::J * total(&self.literal_z_rates[i])? - force_a;
            let second =
                self.literal_zd[i].evaluate(env)? - ParaNumber::J * total(&self.literal_zd_rates[i])? - force_b;
            worst = worst.max(first.max_abs()).max(second.max_abs());
        }
        Ok(worst)
    }

    /// `max_a |ω_a(ξ)|` style residuals, one per constraint.
    pub fn constraint_residuals(
        &self,
        state: &LagrangianState,
        result: &ElSolveResult,
    ) -> Result<Vec<ParaNumber>, DynamicsError> {
        let env = self.environment(state);
        let v = VectorFieldValue::new(state.zdot.clone(), result.zddot.clone());
        self.constraints
            .iter()
            .map(|c| Ok(crate::constraints::residual(c, &v, &env)?))
            .collect()
    }

    /// Max componentwise deviation of `i_ξΦ_L − dE_L` from the constraint
    /// force form `Σ_a Λ_a G_a + Λ'_a G'_a`.
    pub fn el_residual(&self, state: &LagrangianState, result: &ElSolveResult) -> Result<f64, DynamicsError> {
        let m = self.m;
        let env = self.environment(state);
        let xi = VectorFieldValue::new(
            state.zdot.iter().chain(&result.zddot).copied().collect(),
            state.zbardot.iter().chain(&result.zbarddot).copied().collect(),
        );
        let mut lhs = interior_product_value(&xi, &self.phi_l.evaluate(&env)?);
        let de = self.d_energy.evaluate(&env)?;
        let lambdas: Vec<ParaNumber> = result
            .multipliers
            .iter()
            .chain(&result.mirror_multipliers)
            .copied()
            .collect();
        let mut worst = 0.0_f64;
        for p in 0..4 * m {
            let slot_index = p % (2 * m);
            let mut force = ParaNumber::ZERO;
            if slot_index < m {
                for (row, lam) in self.rows.iter().zip(&lambdas) {
                    let g = if p < 2 * m { &row.gz[slot_index] } else { &row.gzb[slot_index] };
                    if !g.is_zero() {
                        force += *lam * g.evaluate(&env)?;
                    }
                }
            }
            let c = lhs.component_mut(p);
            *c -= de.component(p) + force;
            worst = worst.max(c.max_abs());
        }
        Ok(worst)
    }

    pub fn step(&self, state: &LagrangianState, dt: f64, method: Method) -> Result<LagrangianState, DynamicsError> {
        let m = self.m;
        let y = advance(state.t, &state.flatten(), dt, method, |t, y| {
            let s = LagrangianState::from_flat(t, y);
            let (res, _) = self.solve_core(&s)?;
            let mut out = Vec::with_capacity(4 * m);
            out.extend_from_slice(&s.zdot);
            out.extend_from_slice(&s.zbardot);
            out.extend(res.zddot);
            out.extend(res.zbarddot);
            Ok(out)
        })?;
        Ok(LagrangianState::from_flat(state.t + dt, &y))
    }
}

/// Solve the saddle system sheet by sheet. Returns the merged unknowns
/// (accelerations then multipliers) and the max residual.
pub fn solve_blocks(blocks: &ElBlocks) -> Result<(Vec<ParaNumber>, f64), DynamicsError> {
    let n = blocks.mass.len();
    let rows = blocks.constraint_rows.len();
    let size = n + rows;
    let mut full = vec![vec![ParaNumber::ZERO; size]; size];
    for f in 0..n {
        full[f][..n].copy_from_slice(&blocks.mass[f]);
    }
    for (a, row) in blocks.constraint_rows.iter().enumerate() {
        for k in 0..n {
            full[n + a][k] = row[k];
            full[k][n + a] = row[k];
        }
    }
    let rhs: Vec<ParaNumber> = blocks
        .dynamics_rhs
        .iter()
        .chain(&blocks.constraint_rhs)
        .copied()
        .collect();
    let (mp, mm) = split_matrix(&blocks.mass, n);
    let (kp, km) = split_matrix(&full, size);
    let (rp, rm) = split_vector(&rhs);
    let mut solutions = Vec::with_capacity(2);
    let mut residual = 0.0_f64;
    for (sheet, mass, k, r) in [
        (NullComponent::Plus, mp, kp, rp),
        (NullComponent::Minus, mm, km, rm),
    ] {
        if numerical_rank(&mass, RANK_TOL) < n {
            return Err(DynamicsError::SingularMass { sheet });
        }
        let x = solve_saddle(&k, &r, sheet)?;
        residual = residual.max((&k * &x - &r).amax());
        solutions.push(x);
    }
    Ok((merge_vectors(&solutions[0], &solutions[1]), residual))
}

fn solve_saddle(k: &DMatrix<f64>, r: &DVector<f64>, sheet: NullComponent) -> Result<DVector<f64>, DynamicsError> {
    let size = r.len();
    if numerical_rank(k, RANK_TOL) < size {
        let sv = k.clone().svd(false, false).singular_values;
        let measure = sv.min() / sv.max().max(1.0);
        return Err(DynamicsError::InconsistentConstraint { sheet, measure });
    }
    k.clone()
        .lu()
        .solve(r)
        .ok_or(DynamicsError::InconsistentConstraint { sheet, measure: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    const LAG: ConstraintFlavor = ConstraintFlavor::Lagrangian;

    fn p(re: f64, jm: f64) -> ParaNumber {
        ParaNumber::new(re, jm)
    }

    fn system(l: &str, m: usize, constraints: &[(&[&str], &[&str])]) -> LagrangianSystem {
        let cs = constraints
            .iter()
            .map(|(a, b)| ConstraintForm::parse(a, b, LAG).unwrap())
            .collect();
        LagrangianSystem::new(m, parse_expression(l).unwrap(), cs, IND).unwrap()
    }

    fn state1(z: ParaNumber, zd: ParaNumber) -> LagrangianState {
        LagrangianState::conjugate(0.0, vec![z], vec![zd])
    }

    #[test]
    fn liouville_examples() {
        let xi = VectorFieldValue::new(vec![ParaNumber::ONE], vec![ParaNumber::ONE]);
        let v = liouville_field(&xi);
        assert_eq!((v.z[0], v.zbar[0]), (p(0.0, -1.0), ParaNumber::J));
        assert_eq!(liouville_field(&liouville_field(&xi)), xi);
        assert_eq!(liouville_field(&VectorFieldValue::zeros(1)).max_abs(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let sys = system("0.5*zd1*zdb1", 1, &[]);
        let st = state1(p(0.3, 0.1), ParaNumber::ONE);
        assert_eq!(sys.energy(&st).unwrap(), ParaNumber::real(0.5));
        let sys = system("2.5 - J", 1, &[]);
        assert_eq!(sys.energy(&st).unwrap(), p(-2.5, 1.0));
    }

    #[test]
    fn energy_is_liouville_derivative_minus_l() {
        // V(L) = d/dε L(z, (1+ε)·zd) at ε = 0, by central difference.
        let text = "0.5*(zd1^2 + zdb1^2)*z1 - z1*zb1 + J*zd1*zb1 + zd1^3*zdb1";
        let sys = system(text, 1, &[]);
        let l = parse_expression(text).unwrap();
        let st = LagrangianState::new(0.0, vec![p(0.4, 0.2)], vec![p(0.5, -0.1)], vec![p(0.3, 0.6)], vec![p(-0.2, 0.1)]);
        let h = 1e-6;
        let at = |eps: f64| {
            let mut s = st.clone();
            s.zdot[0] = s.zdot[0].scale(1.0 + eps);
            s.zbardot[0] = s.zbardot[0].scale(1.0 + eps);
            l.evaluate(&sys.environment(&s)).unwrap()
        };
        let vl = (at(h) - at(-h)).scale(0.5 / h);
        let want = vl - at(0.0);
        assert!((sys.energy(&st).unwrap() - want).max_abs() < 1e-8);
    }

    #[test]
    fn assembly_examples() {
        let sys = system("0.5*zd1*zdb1", 1, &[]);
        let b = sys.assemble(&state1(p(0.2, 0.0), ParaNumber::ONE)).unwrap();
        let half = ParaNumber::real(0.5);
        assert_eq!(b.mass, vec![vec![ParaNumber::ZERO, half], vec![half, ParaNumber::ZERO]]);
        assert!(b.coupling.iter().flatten().all(|c| *c == ParaNumber::ZERO));

        let sys = system("z1*zb1", 1, &[]);
        let b = sys.assemble(&state1(p(0.2, 0.0), ParaNumber::ONE)).unwrap();
        assert!(b.mass.iter().flatten().all(|c| *c == ParaNumber::ZERO));

        let sys = system("0.5*zd1*zdb1", 1, &[(&["1"], &["0"])]);
        let b = sys.assemble(&state1(p(0.2, 0.0), ParaNumber::ZERO)).unwrap();
        assert_eq!(b.constraint_rows[0], vec![ParaNumber::ONE, ParaNumber::ZERO]);
        assert_eq!(b.constraint_rows[1], vec![ParaNumber::ZERO, ParaNumber::ONE]);
    }

    #[test]
    fn solve_examples() {
        let sys = system("0.5*zd1*zdb1", 1, &[]);
        let res = sys.solve(&state1(p(0.2, 0.1), p(1.0, 0.5))).unwrap();
        assert_eq!(res.zddot, vec![ParaNumber::ZERO]);
        assert!(res.multipliers.is_empty());

        let sys = system("z1", 1, &[]);
        assert!(matches!(
            sys.solve(&state1(ParaNumber::ONE, ParaNumber::ONE)),
            Err(DynamicsError::SingularMass { .. })
        ));
    }

    #[test]
    fn frozen_velocity_multiplier_matches_real_constraint_force() {
        // On the e⁺ sheet with u = z⁺, v = zb⁺ the sheet Lagrangian is
        // ½ u̇ v̇ − k u v. Holding u̇ = 0 needs the force ∂L/∂u = −k v.
        let k = 1.75;
        let sys = system(&format!("0.5*zd1*zdb1 - {k:?}*z1*zb1"), 1, &[(&["1"], &["0"])]);
        let z = p(0.6, 0.25);
        let res = sys.solve(&state1(z, ParaNumber::ZERO)).unwrap();
        let lam = res.multipliers[0].null_split().plus;
        let v = z.conj().null_split().plus;
        assert!((lam - (-k * v)).abs() < 1e-14);
        assert_eq!(res.zddot[0], ParaNumber::ZERO);
    }

    #[test]
    fn el_residual_examples() {
        let sys = system("0.5*(zd1^2 + zdb1^2) - z1*zb1 - 0.1*(z1*zb1)^2 + zd1*z1", 1, &[(&["z1"], &["0"])]);
        let st = state1(p(0.6, 0.2), ParaNumber::ZERO);
        let res = sys.solve(&st).unwrap();
        assert!(sys.el_residual(&st, &res).unwrap() <= 1e-8);
        assert!(res.primary_residual <= 1e-12);

        let mut bumped = res.clone();
        bumped.multipliers[0] += ParaNumber::ONE;
        let form_norm = st.z[0].max_abs();
        assert!(sys.el_residual(&st, &bumped).unwrap() >= form_norm - 1e-12);

        let zero = system("0", 1, &[]);
        let res = ElSolveResult {
            zddot: vec![ParaNumber::ZERO],
            zbarddot: vec![ParaNumber::ZERO],
            multipliers: Vec::new(),
            mirror_multipliers: Vec::new(),
            primary_residual: 0.0,
            secondary_residual: 0.0,
        };
        assert_eq!(zero.el_residual(&st, &res).unwrap(), 0.0);
    }

    #[test]
    fn free_particle_steps_are_linear() {
        let sys = system("0.5*zd1*zdb1", 1, &[]);
        let c = p(0.75, -0.5);
        let st = state1(p(0.2, 0.1), c);
        let e = sys.step(&st, 0.125, Method::Euler).unwrap();
        assert_eq!(e.z[0], st.z[0] + c.scale(0.125));
        let r = sys.step(&st, 0.125, Method::Rk4).unwrap();
        assert_eq!(r, e);
    }

    #[test]
    fn acceleration_level_constraint_is_enforced() {
        let sys = system("0.5*zd1*zdb1 + 0.5*zd2*zdb2 - z1*zb1", 2, &[(&["0", "z1"], &["1", "0"])]);
        let st = LagrangianState::conjugate(0.0, vec![p(0.5, 0.1), p(0.3, 0.0)], vec![p(0.2, 0.0), p(-0.1, 0.05)]);
        let res = sys.solve(&st).unwrap();
        for r in sys.constraint_residuals(&st, &res).unwrap() {
            assert!(r.max_abs() <= 1e-12);
        }
        assert!(sys.el_residual(&st, &res).unwrap() <= 1e-8);
    }

    #[test]
    fn dependent_constraints_are_inconsistent() {
        let sys = system("0.5*zd1*zdb1", 1, &[(&["1"], &["0"]), (&["2"], &["0"])]);
        assert!(matches!(
            sys.solve(&state1(ParaNumber::ONE, ParaNumber::ZERO)),
            Err(DynamicsError::InconsistentConstraint { .. })
        ));
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let sys = system("0.5*(zd1^2 + zdb1^2) - 0.5*(z1^2 + zb1^2) - 0.1*(z1*zb1)^2", 1, &[]);
        let st = state1(p(0.8, 0.3), p(0.1, -0.2));
        let run = |dt: f64, steps: usize| {
            let mut s = st.clone();
            for _ in 0..steps {
                s = sys.step(&s, dt, Method::Rk4).unwrap();
            }
            s
        };
        let reference = run(0.005, 200);
        let coarse = run(0.1, 10);
        let fine = run(0.05, 20);
        let err = |s: &LagrangianState| (s.z[0] - reference.z[0]).max_abs();
        let ratio = err(&coarse) / err(&fine);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }
}
