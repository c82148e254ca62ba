//! `paramech`: run, print, and classify scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use paramech::scenario::{
    builtin, classify_scenario, derive, load_scenario, run, scenario_to_text, write_csv, write_report,
    ScenarioConfig, ScenarioError, BUILTIN_NAMES,
};
use paramech::DerivativeConvention;

#[derive(Parser)]
#[command(name = "paramech", version, about = "Constrained mechanics over split-complex coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one or more scenarios and write the CSV trajectory or JSON report.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Output file; with several configs, a directory receiving one file per config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print the symbolic equations of motion.
    Derive {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the constraints as holonomic or anholonomic near the initial state.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a builtin scenario file (lists the builtins when NAME is omitted).
    Builtin {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    /// Scenario file; may be repeated for `run`.
    #[arg(long = "config", value_name = "PATH", required_unless_present = "builtin")]
    configs: Vec<PathBuf>,
    /// Use a builtin scenario instead of a file.
    #[arg(long, value_name = "NAME", conflicts_with = "configs")]
    builtin: Option<String>,
}

#[derive(Args, Clone, Copy)]
struct Overrides {
    #[arg(long, value_enum)]
    convention: Option<Convention>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Paper,
    Independent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonReport,
}

impl Overrides {
    fn apply(self, config: &mut ScenarioConfig) -> Result<(), ScenarioError> {
        if let Some(c) = self.convention {
            config.convention = match c {
                Convention::Paper => DerivativeConvention::Paper,
                Convention::Independent => DerivativeConvention::Independent,
            };
        }
        if let Some(dt) = self.dt {
            config.integrator.dt = dt;
        }
        if let Some(steps) = self.steps {
            config.integrator.steps = steps;
        }
        config.validate()
    }
}

fn io_error(path: &Path, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Every selected config with overrides applied, labelled for messages.
fn configs(source: &Source, overrides: Overrides) -> Result<Vec<(String, ScenarioConfig)>, ScenarioError> {
    let mut out = Vec::new();
    if let Some(name) = &source.builtin {
        out.push((name.clone(), builtin(name)?));
    }
    for path in &source.configs {
        out.push((path.display().to_string(), load_scenario(path)?));
    }
    for (_, c) in &mut out {
        overrides.apply(c)?;
    }
    Ok(out)
}

fn run_one(config: &ScenarioConfig, out: Option<&Path>, format: Format) -> Result<(), ScenarioError> {
    let outcome = run(config)?;
    let text = match format {
        Format::Csv => write_csv(&outcome.trajectory),
        Format::JsonReport => write_report(&outcome.report),
    };
    let target = out.map(Path::to_path_buf).or_else(|| config.output.path.as_ref().map(PathBuf::from));
    write_or_print(target.as_deref(), &text)?;
    let r = &outcome.report;
    eprintln!(
        "{}: {} steps, energy drift {:.3e}, max constraint residual {:.3e}, conjugation defect {:.3e}",
        config.name, r.steps_completed, r.energy_drift, r.max_constraint_residual, r.conjugation_defect_max
    );
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn run_many(
    configs: &[(String, ScenarioConfig)],
    out: Option<&Path>,
    format: Format,
) -> Result<(), ScenarioError> {
    if configs.len() == 1 {
        return run_one(&configs[0].1, out, format);
    }
    let dir = out.ok_or_else(|| ScenarioError::Validation {
        key: "--out".into(),
        reason: "a directory is required when running several configs".into(),
    })?;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let ext = match format {
        Format::Csv => "csv",
        Format::JsonReport => "json",
    };
    let results: Vec<(String, Result<(), ScenarioError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .enumerate()
            .map(|(k, (label, c))| {
                let path = dir.join(format!("{:02}-{}.{ext}", k + 1, c.name));
                s.spawn(move || (label.clone(), run_one(c, Some(&path), format)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let mut first_error = None;
    for (label, r) in results {
        if let Err(e) = r {
            eprintln!("{label}: {e}");
            first_error.get_or_insert(e);
        }
    }
    first_error.map_or(Ok(()), Err)
}

fn dispatch(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Run {
            source,
            overrides,
            out,
            format,
        } => run_many(&configs(&source, overrides)?, out.as_deref(), format),
        Command::Derive { source, overrides, out } => {
            let mut text = String::new();
            for (_, c) in configs(&source, overrides)? {
                text.push_str(&derive(&c)?);
            }
            write_or_print(out.as_deref(), &text)
        }
        Command::Classify { source, overrides, out } => {
            let mut text = String::new();
            for (_, c) in configs(&source, overrides)? {
                let verdict = classify_scenario(&c)?;
                text.push_str(&serde_json::to_string_pretty(&verdict).expect("verdict serializes"));
                text.push('\n');
            }
            write_or_print(out.as_deref(), &text)
        }
        Command::Builtin { name: None, .. } => {
            for n in BUILTIN_NAMES {
                println!("{n}");
            }
            Ok(())
        }
        Command::Builtin { name: Some(name), out } => write_or_print(out.as_deref(), &scenario_to_text(&builtin(&name)?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
