//! Running a scenario and writing its outputs.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constraints::{classify, HolonomyVerdict};
use crate::expr::EvalEnvironment;
use crate::hamiltonian::{HamiltonianState, HamiltonianSystem};
use crate::integrate::DynamicsError;
use crate::lagrangian::{LagrangianState, LagrangianSystem};
use crate::para::ParaNumber;

use super::builtins::central_force_domain;
use super::model::{Engine, Model};
use super::{Formalism, ScenarioConfig, ScenarioError};

/// Above this the literal-family residual of a Lagrangian step is flagged.
pub const SECONDARY_RESIDUAL_LIMIT: f64 = 1e-6;

const HOLONOMY_SAMPLES: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flag {
    FirstClass,
    SecondaryResidualHigh,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub step: usize,
    pub t: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub scenario: String,
    pub formalism: Formalism,
    /// Accepted steps; equals `integrator.steps` unless the run failed.
    pub steps_completed: usize,
    /// `max_t |E(t) − E(0)|` in the max-abs norm over accepted states.
    pub energy_drift: f64,
    pub max_constraint_residual: f64,
    pub conjugation_defect_max: f64,
    /// Largest literal-family residual (Lagrangian runs; zero otherwise).
    pub secondary_residual_max: f64,
    /// Largest `Σ_a |ω_a(Δz/Δt)|` over accepted steps (Hamiltonian runs;
    /// zero otherwise).
    pub finite_drift_max: f64,
    /// `null` when the classifier cannot run; `holonomy_note` says why.
    pub holonomy: Option<HolonomyVerdict>,
    pub holonomy_note: Option<String>,
    pub flags: Vec<Flag>,
    pub failure: Option<Failure>,
}

/// Sampled rows with a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: DiagnosticsReport,
    /// Set when integration stopped early; the trajectory then holds the
    /// rows recorded before the failure.
    pub error: Option<ScenarioError>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonReport,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-report" => Ok(OutputFormat::JsonReport),
            other => Err(format!("unknown format `{other}` (expected csv|json-report)")),
        }
    }
}

fn header(config: &ScenarioConfig) -> Vec<String> {
    let m = config.dimension;
    let block = |p: &'static str| (1..=m).map(move |i| format!("{p}_{i}"));
    let mut h = vec!["t".to_string()];
    h.extend(block("x"));
    h.extend(block("y"));
    match config.formalism {
        Formalism::Lagrangian => {
            h.extend(block("xd"));
            h.extend(block("yd"));
        }
        Formalism::Hamiltonian => {
            h.extend(block("xbar"));
            h.extend(block("ybar"));
        }
    }
    h.push("E_re".into());
    h.push("E_jm".into());
    h.extend((1..=config.constraints.len()).map(|a| format!("res_{a}")));
    h.push(
        match config.formalism {
            Formalism::Lagrangian => "secondary",
            Formalism::Hamiltonian => "defect",
        }
        .into(),
    );
    h
}

struct Recorder {
    every: usize,
    rows: Vec<Vec<f64>>,
    e0: Option<ParaNumber>,
    energy_drift: f64,
    max_res: f64,
    defect_max: f64,
    secondary_max: f64,
    finite_drift_max: f64,
    first_class: bool,
    samples: Vec<EvalEnvironment>,
}

impl Recorder {
    fn new(every: usize) -> Self {
        Self {
            every,
            rows: Vec::new(),
            e0: None,
            energy_drift: 0.0,
            max_res: 0.0,
            defect_max: 0.0,
            secondary_max: 0.0,
            finite_drift_max: 0.0,
            first_class: false,
            samples: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        step: usize,
        t: f64,
        blocks: [&[ParaNumber]; 2],
        energy: ParaNumber,
        residuals: &[ParaNumber],
        last: f64,
        env: EvalEnvironment,
    ) {
        let e0 = *self.e0.get_or_insert(energy);
        self.energy_drift = self.energy_drift.max((energy - e0).max_abs());
        for r in residuals {
            self.max_res = self.max_res.max(r.max_abs());
        }
        self.samples.push(env);
        if !step.is_multiple_of(self.every) {
            return;
        }
        let mut row = vec![t];
        for block in blocks {
            row.extend(block.iter().map(|v| v.re));
            row.extend(block.iter().map(|v| v.jm));
        }
        row.push(energy.re);
        row.push(energy.jm);
        row.extend(residuals.iter().map(|r| r.max_abs()));
        row.push(last);
        self.rows.push(row);
    }
}

enum Stop {
    Dynamics(usize, f64, DynamicsError),
    Domain(usize, f64, String),
}

impl Stop {
    fn into_error(self) -> (ScenarioError, usize, f64) {
        match self {
            Stop::Dynamics(step, t, source) => (ScenarioError::Numerical { step, source }, step, t),
            Stop::Domain(step, t, message) => (ScenarioError::Domain { step, t, message }, step, t),
        }
    }
}

fn guard_hamiltonian(guarded: bool, step: usize, s: &HamiltonianState) -> Result<(), Stop> {
    if guarded {
        for (z, zb) in s.z.iter().zip(&s.zbar) {
            central_force_domain(*z, *zb).map_err(|msg| Stop::Domain(step, s.t, msg))?;
        }
    }
    Ok(())
}

fn run_hamiltonian(
    model: &Model,
    sys: &HamiltonianSystem,
    rec: &mut Recorder,
    completed: &mut usize,
) -> Result<(), Stop> {
    let cfg = &model.config;
    let guarded = cfg.name == "central-force";
    let (dt, method) = (cfg.integrator.dt, cfg.integrator.method);
    let mut state = model.initial_hamiltonian();
    guard_hamiltonian(guarded, 0, &state)?;
    for step in 0..=cfg.integrator.steps {
        let fail = |e| Stop::Dynamics(step, state.t, e);
        let sol = sys.total_field(&state).map_err(fail)?;
        rec.first_class |= sol.multipliers.first_class;
        let res = sys.constraint_residuals(&state, &sol.field).map_err(fail)?;
        let energy = sys.energy(&state).map_err(fail)?;
        let defect = state.conjugation_defect();
        rec.defect_max = rec.defect_max.max(defect);
        rec.record(step, state.t, [&state.z, &state.zbar], energy, &res, defect, sys.environment(&state));
        *completed = step;
        if step == cfg.integrator.steps {
            break;
        }
        let next = step + 1;
        let out = sys.step(&state, dt, method).map_err(|e| Stop::Dynamics(next, state.t, e))?;
        rec.first_class |= out.first_class;
        guard_hamiltonian(guarded, next, &out.state)?;
        let drift = sys
            .finite_drift(&state, &out.state, dt)
            .map_err(|e| Stop::Dynamics(next, out.state.t, e))?;
        rec.finite_drift_max = rec.finite_drift_max.max(drift);
        state = out.state;
    }
    Ok(())
}

fn run_lagrangian(
    model: &Model,
    sys: &LagrangianSystem,
    rec: &mut Recorder,
    completed: &mut usize,
) -> Result<(), Stop> {
    let cfg = &model.config;
    let (dt, method) = (cfg.integrator.dt, cfg.integrator.method);
    let mut state: LagrangianState = model.initial_lagrangian();
    for step in 0..=cfg.integrator.steps {
        let fail = |e| Stop::Dynamics(step, state.t, e);
        let result = sys.solve(&state).map_err(fail)?;
        let res = sys.constraint_residuals(&state, &result).map_err(fail)?;
        let energy = sys.energy(&state).map_err(fail)?;
        rec.defect_max = rec.defect_max.max(state.conjugation_defect());
        rec.secondary_max = rec.secondary_max.max(result.secondary_residual);
        rec.record(
            step,
            state.t,
            [&state.z, &state.zdot],
            energy,
            &res,
            result.secondary_residual,
            sys.environment(&state),
        );
        *completed = step;
        if step == cfg.integrator.steps {
            break;
        }
        state = sys.step(&state, dt, method).map_err(|e| Stop::Dynamics(step + 1, state.t, e))?;
    }
    Ok(())
}

fn holonomy(model: &Model, samples: &[EvalEnvironment]) -> (Option<HolonomyVerdict>, Option<String>) {
    let picked: Vec<EvalEnvironment> = if samples.len() <= HOLONOMY_SAMPLES {
        samples.to_vec()
    } else {
        (0..HOLONOMY_SAMPLES)
            .map(|k| samples[k * (samples.len() - 1) / (HOLONOMY_SAMPLES - 1)].clone())
            .collect()
    };
    match classify(&model.constraints, &picked, model.config.convention) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Integrate `config` and compute its diagnostics. Validation problems are
/// returned as `Err`; numerical failures come back inside [`RunOutcome`]
/// together with the partial trajectory.
pub fn run(config: &ScenarioConfig) -> Result<RunOutcome, ScenarioError> {
    let model = Model::build(config)?;
    let mut rec = Recorder::new(config.output.every);
    let mut completed = 0;
    let result = match &model.engine {
        Engine::Hamiltonian(sys) => run_hamiltonian(&model, sys, &mut rec, &mut completed),
        Engine::Lagrangian(sys) => run_lagrangian(&model, sys, &mut rec, &mut completed),
    };
    let mut flags = Vec::new();
    if rec.first_class {
        flags.push(Flag::FirstClass);
    }
    if rec.secondary_max > SECONDARY_RESIDUAL_LIMIT {
        flags.push(Flag::SecondaryResidualHigh);
    }
    let (error, failure) = match result {
        Ok(()) => (None, None),
        Err(stop) => {
            flags.push(Flag::Failed);
            let (err, step, t) = stop.into_error();
            let failure = Failure {
                step,
                t,
                message: err.to_string(),
            };
            (Some(err), Some(failure))
        }
    };
    let (holonomy, holonomy_note) = holonomy(&model, &rec.samples);
    let report = DiagnosticsReport {
        scenario: config.name.clone(),
        formalism: config.formalism,
        steps_completed: completed,
        energy_drift: rec.energy_drift,
        max_constraint_residual: rec.max_res,
        conjugation_defect_max: rec.defect_max,
        secondary_residual_max: rec.secondary_max,
        finite_drift_max: rec.finite_drift_max,
        holonomy,
        holonomy_note,
        flags,
        failure,
    };
    Ok(RunOutcome {
        trajectory: Trajectory {
            header: header(config),
            rows: rec.rows,
        },
        report,
        error,
    })
}

/// Classify the scenario's constraints at 25 deterministic points around
/// its initial state.
pub fn classify_scenario(config: &ScenarioConfig) -> Result<HolonomyVerdict, ScenarioError> {
    let model = Model::build(config)?;
    let m = config.dimension;
    let offset = |k: usize, i: usize, phase: f64| {
        if k == 0 {
            ParaNumber::ZERO
        } else {
            let s = k as f64 * 1.3 + i as f64 * 0.7 + phase;
            ParaNumber::new(0.05 * s.sin(), 0.03 * (1.7 * s).cos())
        }
    };
    let samples: Vec<EvalEnvironment> = (0..HOLONOMY_SAMPLES)
        .map(|k| match &model.engine {
            Engine::Hamiltonian(sys) => {
                let s0 = model.initial_hamiltonian();
                let d: Vec<ParaNumber> = (0..m).map(|i| offset(k, i, 0.0)).collect();
                let z = s0.z.iter().zip(&d).map(|(a, b)| *a + *b).collect();
                let zbar = s0.zbar.iter().zip(&d).map(|(a, b)| *a + b.conj()).collect();
                sys.environment(&HamiltonianState::new(0.0, z, zbar))
            }
            Engine::Lagrangian(sys) => {
                let s0 = model.initial_lagrangian();
                let z = (0..m).map(|i| s0.z[i] + offset(k, i, 0.0)).collect();
                let zd = (0..m).map(|i| s0.zdot[i] + offset(k, i, 2.1)).collect();
                sys.environment(&LagrangianState::conjugate(0.0, z, zd))
            }
        })
        .collect();
    classify(&model.constraints, &samples, config.convention)
        .map_err(|e| ScenarioError::validation("constraints", e))
}

pub fn write_csv(trajectory: &Trajectory) -> String {
    let mut s = trajectory.header.join(",");
    s.push('\n');
    for row in &trajectory.rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_report(report: &DiagnosticsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn emit(
    trajectory: &Trajectory,
    report: &DiagnosticsReport,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    let text = match format {
        OutputFormat::Csv => write_csv(trajectory),
        OutputFormat::JsonReport => write_report(report),
    };
    std::fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn short(name: &str, steps: usize) -> ScenarioConfig {
        let mut c = builtin(name).unwrap();
        c.integrator.steps = steps;
        c
    }

    #[test]
    fn free_particle_three_steps_gives_four_rows() {
        let out = run(&short("free-particle", 3)).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.trajectory.rows.len(), 4);
        assert_eq!(out.trajectory.rows[0][0], 0.0);
        let csv = write_csv(&out.trajectory);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("t,x_1,y_1,xd_1,yd_1,E_re,E_jm,secondary\n"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn every_thins_rows() {
        let mut c = short("quadratic-h", 10);
        c.output.every = 4;
        let out = run(&c).unwrap();
        let ts: Vec<usize> = out.trajectory.rows.iter().map(|r| (r[0] / 1e-3).round() as usize).collect();
        assert_eq!(ts, [0, 4, 8]);
    }

    #[test]
    fn frozen_rows_are_identical_after_t0() {
        let out = run(&short("frozen-2constraint", 50)).unwrap();
        let first = &out.trajectory.rows[0][1..];
        for row in &out.trajectory.rows {
            assert_eq!(&row[1..], first);
        }
        assert!(out.report.holonomy.is_none());
        assert!(out.report.holonomy_note.is_some());
    }

    #[test]
    fn domain_violation_names_w() {
        let mut c = short("central-force", 5);
        c.initial.x = vec![0.1];
        c.initial.y = vec![0.5];
        let out = run(&c).unwrap();
        match out.error {
            Some(ScenarioError::Domain { step: 0, message, .. }) => assert!(message.contains("W =")),
            other => panic!("{other:?}"),
        }
        assert_eq!(out.report.flags, vec![Flag::Failed]);
        assert!(out.trajectory.rows.is_empty());
    }

    #[test]
    fn report_has_fixed_keys() {
        let out = run(&short("anholonomic-demo", 30)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&write_report(&out.report)).unwrap();
        for key in [
            "energy_drift",
            "max_constraint_residual",
            "conjugation_defect_max",
            "holonomy",
            "flags",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["holonomy"]["verdict"], "anholonomic");
    }
}
