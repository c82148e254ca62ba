//! Symbolic equations of motion as text.

use std::fmt::Write as _;

use crate::calculus::wirtinger_derivative;
use crate::constraints::ConstraintForm;
use crate::coords::{Slot, Which};
use crate::expr::{parse_expression, simplify, EvalEnvironment, Expr};
use crate::forms::canonical_structures;
use crate::hamiltonian::HamiltonianState;
use crate::para::ParaNumber;

use super::builtins::{central_force_lagrangian_text, CENTRAL_FORCE_W};
use super::model::{substitute_constants, Engine, Model};
use super::{ScenarioConfig, ScenarioError};

fn multiplier(a: usize) -> Expr {
    Expr::coord(&format!("Lambda{}", a + 1))
}

/// `Σ_a Λ_a · pick(ω_a)[i]`.
fn force(constraints: &[ConstraintForm], i: usize, pick: impl Fn(&ConstraintForm) -> &[Expr]) -> Expr {
    Expr::sum(
        constraints
            .iter()
            .enumerate()
            .map(|(a, c)| Expr::mul(multiplier(a), pick(c)[i].clone())),
    )
}

fn wrap(text: &str) -> String {
    if text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
        text.to_string()
    } else {
        format!("({text})")
    }
}

/// Print the scenario's equations of motion, its two-form, and for the
/// central-force scenario a comparison against the reference `S`, `U`, `H1`,
/// `H2` expressions.
pub fn derive(config: &ScenarioConfig) -> Result<String, ScenarioError> {
    let model = Model::build(config)?;
    let m = config.dimension;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {}: {}, m = {m}, convention {}",
        config.name, config.formalism, config.convention
    );
    if !model.constraints.is_empty() {
        let _ = writeln!(
            out,
            "# Lambda1..Lambda{} are the constraint multipliers",
            model.constraints.len()
        );
    }
    match &model.engine {
        Engine::Lagrangian(sys) => {
            let _ = writeln!(out, "L = {}", model.function);
            for i in 1..=m {
                let lz = wirtinger_derivative(&model.function, Slot::position(i), Which::Z, config.convention);
                let lzd = wirtinger_derivative(&model.function, Slot::velocity(i), Which::Z, config.convention);
                let fa = simplify(&force(&model.constraints, i - 1, |c| &c.a));
                let fb = simplify(&Expr::neg(force(&model.constraints, i - 1, |c| &c.b)));
                let fb = if fb.is_zero() { Expr::zero() } else { fb };
                let _ = writeln!(out, "J*d/dt({lz}) + {} = {fa}", wrap(&lz.to_string()));
                let _ = writeln!(out, "J*d/dt({lzd}) - {} = {fb}", wrap(&lzd.to_string()));
            }
            let _ = writeln!(out, "E_L = {}", sys.energy_expr());
            let _ = writeln!(out, "Phi_L = {}", sys.kahler_form());
        }
        Engine::Hamiltonian(sys) => {
            let _ = writeln!(out, "H = {}", model.function);
            let (hz, hzb) = sys.gradients();
            for i in 1..=m {
                let zdot = Expr::mul(
                    Expr::constant(-ParaNumber::J),
                    Expr::add(hzb[i - 1].clone(), force(&model.constraints, i - 1, |c| &c.b)),
                );
                let zbdot = Expr::mul(
                    Expr::constant(ParaNumber::J),
                    Expr::add(hz[i - 1].clone(), force(&model.constraints, i - 1, |c| &c.a)),
                );
                let _ = writeln!(out, "dz{i}/dt = {}", simplify(&zdot));
                let _ = writeln!(out, "dzb{i}/dt = {}", simplify(&zbdot));
            }
            for (a, c) in model.constraints.iter().enumerate() {
                let mut terms = Vec::new();
                for i in 1..=m {
                    for (coef, name) in [(&c.a[i - 1], format!("dz{i}/dt")), (&c.b[i - 1], format!("dzb{i}/dt"))] {
                        if coef.is_one() {
                            terms.push(name);
                        } else if !coef.is_zero() {
                            terms.push(format!("{}*{name}", wrap(&coef.to_string())));
                        }
                    }
                }
                let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                let _ = writeln!(out, "constraint {}: {lhs} = 0", a + 1);
            }
            let _ = writeln!(out, "Phi = {}", canonical_structures(m).1);
            if config.name == "central-force" && m == 1 {
                central_force_section(&model, &mut out);
            }
        }
    }
    Ok(out)
}

const TOLERANCE: f64 = 1e-9;

const REFERENCE_S: [&str; 5] = [
    "-(A/(2*z1))*sqrt(z1*zb1)^alpha",
    "-J*(m*g*(z1-zb1)*zb1)/(2*sqrt(z1*zb1)*(z1+zb1)*W)",
    "-J*(m*g*sqrt(z1*zb1))/((z1+zb1)*W)",
    "J*(m*g*sqrt(z1*zb1)*(z1-zb1))/((z1+zb1)^2*W)",
    "J*(m*g*sqrt(z1*zb1)*(z1-zb1)*(-(z1-zb1)/(z1+zb1)^2 + (z1-zb1)^2/(z1+zb1)^3))/((z1+zb1)*W^3)",
];

const REFERENCE_U: [&str; 5] = [
    "-(A/(2*zb1))*sqrt(z1*zb1)^alpha",
    "-J*(m*g*(z1-zb1)*z1)/(2*sqrt(z1*zb1)*(z1+zb1)*W)",
    "J*(m*g*sqrt(z1*zb1))/((z1+zb1)*W)",
    "J*(m*g*sqrt(z1*zb1)*(z1-zb1))/((z1+zb1)^2*W)",
    "J*(m*g*sqrt(z1*zb1)*(z1-zb1)*((z1-zb1)/(z1+zb1)^2 + (z1-zb1)^2/(z1+zb1)^3))/((z1+zb1)*W^3)",
];

/// Bracket of `dz/dt = -J*(...)`.
const REFERENCE_H1: [&str; 5] = [
    "(A/(2*zb1))*sqrt(z1*zb1)^alpha",
    "J*(m*g*(z1-zb1)*z1)/(2*sqrt(z1*zb1)*(z1+zb1)*W)",
    "-J*(m*g*sqrt(z1*zb1))/((z1+zb1)*W)",
    "-J*(m*g*sqrt(z1*zb1)*(z1-zb1))/((z1+zb1)^2*W)",
    "-J*(m*g*sqrt(z1*zb1)*(z1-zb1)*((z1-zb1)/(z1+zb1)^2 + (z1-zb1)^2/(z1+zb1)^3))/((z1+zb1)*W^3)",
];

/// Bracket of `dzb/dt = J*(...)`.
const REFERENCE_H2: [&str; 5] = [
    "(A/(2*z1))*sqrt(z1*zb1)^alpha",
    "J*(m*g*(z1-zb1)*zb1)/(2*sqrt(z1*zb1)*(z1+zb1)*W)",
    "J*(m*g*sqrt(z1*zb1))/((z1+zb1)*W)",
    "-J*(m*g*sqrt(z1*zb1)*(z1-zb1))/((z1+zb1)^2*W)",
    "-J*(m*g*sqrt(z1*zb1)*(z1-zb1)*(-(z1-zb1)/(z1+zb1)^2 + (z1-zb1)^2/(z1+zb1)^3))/((z1+zb1)*W^3)",
];

/// Points with `z̄ = conj(z)` inside the domain of `W`.
fn sample_points() -> Vec<ParaNumber> {
    let mut pts = Vec::new();
    for x in [0.9, 1.1, 1.3, 1.6] {
        for y in [0.15, -0.25] {
            pts.push(ParaNumber::new(x, y));
        }
    }
    pts
}

struct Comparison<'a> {
    label: &'a str,
    terms: &'a [&'a str; 5],
    target: (&'a str, &'a Expr),
    other: (&'a str, &'a Expr),
}

fn relative(a: ParaNumber, b: ParaNumber) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

fn compare(model: &Model, cmp: &Comparison<'_>, out: &mut String) {
    let consts = &model.config.constants;
    let terms: Result<Vec<Expr>, _> = cmp
        .terms
        .iter()
        .map(|t| parse_expression(&substitute_constants(&t.replace('W', CENTRAL_FORCE_W), consts)))
        .collect();
    let terms = match terms {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(out, "{}: could not parse reference terms: {e}", cmp.label);
            return;
        }
    };
    let _ = writeln!(out, "{} = {}", cmp.label, cmp.terms.join(" + "));

    // Values per point: (terms, target, other).
    let mut values = Vec::new();
    for z in sample_points() {
        let env: EvalEnvironment = model.hamiltonian_environment(&HamiltonianState::conjugate(0.0, vec![z]));
        let eval = || -> Result<_, crate::expr::ExprError> {
            let tv = terms.iter().map(|t| t.evaluate(&env)).collect::<Result<Vec<_>, _>>()?;
            Ok((tv, cmp.target.1.evaluate(&env)?, cmp.other.1.evaluate(&env)?))
        };
        match eval() {
            Ok(v) => values.push(v),
            Err(e) => {
                let _ = writeln!(out, "  evaluation failed at z1 = {z}: {e}");
                return;
            }
        }
    }
    let deviation = |adjust: &dyn Fn(&[ParaNumber]) -> ParaNumber, use_other: bool| {
        values
            .iter()
            .map(|(tv, target, other)| relative(adjust(tv), if use_other { *other } else { *target }))
            .fold(0.0_f64, f64::max)
    };
    let sum = |tv: &[ParaNumber]| tv.iter().copied().sum::<ParaNumber>();
    let dev = deviation(&sum, false);
    let verdict = if dev <= TOLERANCE { "agree" } else { "differ" };
    let _ = writeln!(
        out,
        "  vs {}: max relative deviation {dev:.3e} over {} points: {verdict}",
        cmp.target.0,
        values.len()
    );
    if dev > TOLERANCE {
        let mut reconciled = false;
        for k in 0..terms.len() {
            let flipped = |tv: &[ParaNumber]| sum(tv) - tv[k].scale(2.0);
            let d = deviation(&flipped, false);
            if d <= TOLERANCE {
                reconciled = true;
                let _ = writeln!(out, "    term {} (`{}`) with its sign flipped reconciles ({d:.3e})", k + 1, cmp.terms[k]);
            }
        }
        if !reconciled {
            let _ = writeln!(out, "    no single-term sign flip reconciles");
        }
        let d_other = deviation(&sum, true);
        if d_other <= TOLERANCE {
            let _ = writeln!(out, "    matches {} instead ({d_other:.3e})", cmp.other.0);
        }
    }
}

fn central_force_section(model: &Model, out: &mut String) {
    let conv = model.config.convention;
    let l = match parse_expression(&substitute_constants(central_force_lagrangian_text(), &model.config.constants)) {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(out, "# central-force comparison skipped: {e}");
            return;
        }
    };
    let lz = wirtinger_derivative(&l, Slot::position(1), Which::Z, conv);
    let lzb = wirtinger_derivative(&l, Slot::position(1), Which::ZBar, conv);
    let _ = writeln!(out, "# central-force Lagrangian and its position derivatives");
    let _ = writeln!(out, "L = {l}");
    let _ = writeln!(out, "dL/dz1 = {lz}");
    let _ = writeln!(out, "dL/dzb1 = {lzb}");

    let Engine::Hamiltonian(sys) = &model.engine else {
        return;
    };
    let (hz, hzb) = sys.gradients();
    let _ = writeln!(
        out,
        "# side by side with the reference S, U, H1, H2 expressions, W = {CENTRAL_FORCE_W}, tolerance {TOLERANCE:e}"
    );
    let comparisons = [
        Comparison {
            label: "S",
            terms: &REFERENCE_S,
            target: ("dL/dz1", &lz),
            other: ("dL/dzb1", &lzb),
        },
        Comparison {
            label: "U",
            terms: &REFERENCE_U,
            target: ("dL/dzb1", &lzb),
            other: ("dL/dz1", &lz),
        },
        Comparison {
            label: "H1 bracket",
            terms: &REFERENCE_H1,
            target: ("dH/dzb1", &hzb[0]),
            other: ("dH/dz1", &hz[0]),
        },
        Comparison {
            label: "H2 bracket",
            terms: &REFERENCE_H2,
            target: ("dH/dz1", &hz[0]),
            other: ("dH/dzb1", &hzb[0]),
        },
    ];
    for c in &comparisons {
        compare(model, c, out);
    }
}
