//! Command-line front end: runs named presets or scenario files, applies
//! dotted-path overrides, delegates gain sweeps, and writes artifacts
//! (trajectory CSV, optional estimate CSV, sweep CSV, JSON summary).
//!
//! Exit codes: 0 success, 1 preset outcome violation, 2 unknown preset or
//! invalid input, 3 divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use neso::analysis::{pi_gain_sweep, tail_window, AnalysisError};
use neso::config::{apply_override, ConfigError, ScenarioConfig};
use neso::preset::{self, OutcomeReport, PRESET_NAMES};
use neso::seeker::{gain_condition_report, GainReport};
use neso::sim::{run, ultimate_bound, Scenario, SimError, Trajectory};

const EXIT_OUTCOME_VIOLATION: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "neso",
    version,
    about = "Distributed Nash equilibrium seeking under disturbed player dynamics",
    long_about = None
)]
struct Cli {
    /// Run a named benchmark preset and check its expected outcomes
    #[arg(
        long,
        value_name = "NAME",
        conflicts_with_all = ["config", "set", "sweep_axis", "sweep_levels"]
    )]
    preset: Option<String>,

    /// Run a scenario description file (JSON)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for artifacts
    #[arg(long, value_name = "DIR", default_value = "neso_out")]
    out: PathBuf,

    /// Dotted-path override, e.g. gains.sigma=40 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Gain axis to sweep (sigma or theta; PI scenarios only)
    #[arg(
        long,
        value_name = "NAME",
        requires = "config",
        requires = "sweep_levels"
    )]
    sweep_axis: Option<String>,

    /// Comma-separated sweep levels
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        requires = "sweep_axis"
    )]
    sweep_levels: Option<Vec<f64>>,

    /// Also record and write the full estimate tensor CSV
    #[arg(long)]
    record_estimates: bool,

    /// List the available presets and exit
    #[arg(long, exclusive = true)]
    list_presets: bool,
}

/// Run summary written to `summary.json` and printed to stdout.
#[derive(Debug, Serialize)]
struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    /// `||xi||_inf` at the final sample.
    final_error_inf: f64,
    /// Sup of the stacked error norm over the tail window.
    ultimate_bound: f64,
    /// Sup of `||zeta2||_inf` over the tail window.
    observer_tail_error: f64,
    tail_window: (f64, f64),
    /// The oracle equilibrium the errors are measured against.
    nash_point: Vec<f64>,
    gain_report: GainReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome: Option<OutcomeReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[derive(Debug)]
enum CliError {
    Preset(preset::PresetError),
    Config(ConfigError),
    Sim(SimError),
    Analysis(AnalysisError),
    Io(std::io::Error),
    BadAxis(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Preset(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Analysis(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::BadAxis(axis) => {
                write!(
                    f,
                    "sweep axis '{axis}' is not a scalar PI gain (use sigma or theta)"
                )
            }
        }
    }
}

impl From<preset::PresetError> for CliError {
    fn from(e: preset::PresetError) -> Self {
        CliError::Preset(e)
    }
}
impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}
impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}
impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Analysis(e)
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn exit_code_for(e: &CliError) -> u8 {
    match e {
        CliError::Sim(SimError::Divergence { .. }) | CliError::Sim(SimError::NonFinite { .. }) => {
            EXIT_DIVERGENCE
        }
        CliError::Analysis(AnalysisError::Sim(SimError::Divergence { .. })) => EXIT_DIVERGENCE,
        _ => EXIT_INVALID_INPUT,
    }
}

fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    if cli.list_presets {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return Ok(0);
    }
    if let Some(name) = &cli.preset {
        return run_preset(cli, name);
    }
    if let Some(path) = &cli.config {
        let config = load_config(path, &cli.set)?;
        if let (Some(axis), Some(levels)) = (&cli.sweep_axis, &cli.sweep_levels) {
            return run_sweep(cli, &config, axis, levels);
        }
        return run_config(cli, &config, None);
    }
    eprintln!("error: one of --preset, --config or --list-presets is required");
    Ok(EXIT_INVALID_INPUT)
}

fn load_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    for assignment in overrides {
        apply_override(&mut doc, assignment)?;
    }
    let config: ScenarioConfig =
        serde_json::from_value(doc).map_err(|e| ConfigError::Schema(e.to_string()))?;
    Ok(config)
}

fn run_preset(cli: &Cli, name: &str) -> Result<u8, CliError> {
    let preset = preset::load(name)?;
    let mut config = preset.scenario.clone();
    config.record_estimates |= cli.record_estimates;
    let scenario = config.build()?;
    let traj = run(&scenario)?;
    let outcome = preset.expected.evaluate(&traj)?;
    let summary = summarize(&scenario, &traj, Some(name.to_string()), Some(outcome));
    write_artifacts(cli, &config, &traj, &summary)?;
    for check in summary.outcome.as_ref().unwrap().checks.iter() {
        println!(
            "{name}: {} = {:.6e} (limit {:.3e}) {}",
            check.name,
            check.actual,
            check.limit,
            if check.passed { "ok" } else { "VIOLATED" }
        );
    }
    if summary.outcome.as_ref().unwrap().passed {
        Ok(0)
    } else {
        Ok(EXIT_OUTCOME_VIOLATION)
    }
}

fn run_config(
    cli: &Cli,
    config: &ScenarioConfig,
    preset_name: Option<String>,
) -> Result<u8, CliError> {
    let mut config = config.clone();
    config.record_estimates |= cli.record_estimates;
    let scenario = config.build()?;
    let traj = run(&scenario)?;
    let summary = summarize(&scenario, &traj, preset_name, None);
    write_artifacts(cli, &config, &traj, &summary)?;
    Ok(0)
}

fn run_sweep(
    cli: &Cli,
    config: &ScenarioConfig,
    axis: &str,
    levels: &[f64],
) -> Result<u8, CliError> {
    let scenario = config.build()?;
    let base_theta = scenario.gains.theta();
    let base_sigma = match &scenario.gains {
        neso::seeker::SeekerGains::Pi(g) => g.sigma,
        neso::seeker::SeekerGains::Rise(_) => {
            // pi_gain_sweep rejects this too; fail early with the axis hint
            return Err(CliError::BadAxis(axis.to_string()));
        }
    };
    let table = match axis {
        "sigma" => pi_gain_sweep(&scenario, levels, &[base_theta])?,
        "theta" => pi_gain_sweep(&scenario, &[base_sigma], levels)?,
        other => return Err(CliError::BadAxis(other.to_string())),
    };
    std::fs::create_dir_all(&cli.out)?;
    let path = cli.out.join("sweep.csv");
    let mut file = std::fs::File::create(&path)?;
    table.write_csv(&mut file)?;
    for row in &table.rows {
        println!(
            "sigma={} theta={} ultimate_bound={} diverged={}",
            row.sigma,
            row.theta,
            row.ultimate_bound
                .map(|b| format!("{b:.6e}"))
                .unwrap_or_else(|| "nan".into()),
            row.diverged
        );
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn summarize(
    scenario: &Scenario,
    traj: &Trajectory,
    preset: Option<String>,
    outcome: Option<OutcomeReport>,
) -> Summary {
    let window = tail_window(scenario);
    Summary {
        preset,
        final_error_inf: traj.final_xi_inf(),
        ultimate_bound: ultimate_bound(traj, window).expect("tail window is recorded"),
        observer_tail_error: traj.sup_zeta2_inf(window).expect("tail window is recorded"),
        tail_window: window,
        nash_point: traj.x_star.iter().copied().collect(),
        gain_report: gain_condition_report(&scenario.game, &scenario.environment, &scenario.gains),
        outcome,
    }
}

fn write_artifacts(
    cli: &Cli,
    config: &ScenarioConfig,
    traj: &Trajectory,
    summary: &Summary,
) -> Result<(), CliError> {
    std::fs::create_dir_all(&cli.out)?;
    let scenario_path = cli.out.join("scenario.json");
    std::fs::write(
        &scenario_path,
        serde_json::to_string_pretty(config).expect("config serializes") + "\n",
    )?;
    let csv_path = cli.out.join("trajectory.csv");
    let mut csv = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    traj.write_csv(&mut csv)?;
    if config.record_estimates {
        let est_path = cli.out.join("estimates.csv");
        let mut est = std::io::BufWriter::new(std::fs::File::create(&est_path)?);
        traj.write_estimates_csv(&mut est)?;
    }
    let summary_text = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(cli.out.join("summary.json"), summary_text.clone() + "\n")?;
    println!("{summary_text}");
    println!("artifacts in {}", cli.out.display());
    Ok(())
}
