//! Command-line front end: configuration, sweeps, figure recipes and fits.
//!
//! Exit codes: 0 success, 1 validation error, 2 an analytic point did not
//! converge, 3 I/O error.

pub mod config;
pub mod fit;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

pub use config::{load_config, Format, Method, ScenarioSpec, SweepConfig};
pub use fit::{fit_curves, fit_decay, CurveFit, DecayFit};
pub use sweep::{run_sweep, ResultRow, SweepOutcome};

use crate::geometry::ArrayGeometry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fpmimo", version, about = "Distance to favorable propagation of clustered ray channels")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Monte-Carlo seed, replacing the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted-path config override, e.g. `mc.samples=1000`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// κ vs M for all topologies, low spread, with the spherical baseline.
    Fig1,
    /// κ vs M for all topologies, high spread.
    Fig2,
    /// Large-M decay of the ULA, low spread.
    Fig3,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the curve data behind one figure.
    Figure {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit log κ against log M for every curve in a results file.
    Fit {
        /// CSV or JSON (by extension) results file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const FIGURE_M: [usize; 7] = [16, 36, 64, 100, 144, 196, 256];

fn topology_sweep(m_list: &[usize]) -> Vec<ArrayGeometry> {
    let mut g: Vec<ArrayGeometry> = m_list.iter().map(|&m| ArrayGeometry::Ula { m, dx: 0.5 }).collect();
    g.extend(m_list.iter().map(|&m| {
        let side = (m as f64).sqrt().round() as usize;
        ArrayGeometry::Hura {
            mx: side,
            my: side,
            dx: 0.5,
            dy: 0.5,
        }
    }));
    g.extend(m_list.iter().map(|&m| ArrayGeometry::Uca { m, dr: 0.5 }));
    g
}

fn preset(scenario: ScenarioSpec, geometries: Vec<ArrayGeometry>, methods: Vec<Method>, p_sh: Vec<f64>) -> SweepConfig {
    SweepConfig {
        scenario,
        geometries,
        methods,
        p_sh,
        total_clusters: vec![3],
        mc: Default::default(),
        truncation: Default::default(),
        output: Default::default(),
    }
}

fn figure_configs(figure: Figure) -> Vec<SweepConfig> {
    let both = vec![Method::Analytic, Method::Mc];
    let sharing = vec![0.0, 1.0 / 3.0];
    match figure {
        Figure::Fig1 => vec![
            preset(ScenarioSpec::Scen1, topology_sweep(&FIGURE_M), both, sharing),
            // no sharing for the baseline
            preset(ScenarioSpec::UniformSphere, topology_sweep(&FIGURE_M), vec![Method::Mc], vec![0.0]),
        ],
        Figure::Fig2 => vec![preset(ScenarioSpec::Scen2, topology_sweep(&FIGURE_M), both, sharing)],
        Figure::Fig3 => {
            let ula = (6..=12).map(|e| ArrayGeometry::Ula { m: 1 << e, dx: 0.5 }).collect();
            vec![preset(ScenarioSpec::Scen1, ula, vec![Method::Analytic], sharing)]
        }
    }
}

fn customise(value: Value, args: &OutputArgs) -> Result<SweepConfig, CliError> {
    let mut value = value;
    for o in &args.overrides {
        config::apply_override(&mut value, o)?;
    }
    let mut cfg = config::from_value(value)?;
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(p) = &args.out {
        cfg.output.path = Some(p.clone());
    }
    Ok(cfg)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs the configs, writes all rows to the first config's output, and maps
/// the outcome to an error when nothing succeeded or a series was capped.
fn sweep_and_write(configs: &[SweepConfig]) -> Result<Vec<ResultRow>, CliError> {
    let mut rows = Vec::new();
    let mut unconverged = false;
    for cfg in configs {
        let out = run_sweep(cfg);
        unconverged |= out.has_unconverged();
        rows.extend(out.rows);
    }
    if rows.iter().all(|r| r.error.is_some()) {
        let first = rows.first().and_then(|r| r.error.clone()).unwrap_or_default();
        return Err(CliError::Validation(format!("every point failed; first error: {first}")));
    }
    let settings = &configs[0].output;
    let mut w = open_output(settings.path.as_deref())?;
    output::write_rows(&rows, settings.format, &mut w)?;
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} {} M={} p_sh={}: {}",
            r.method,
            r.topology,
            r.m,
            r.p_sh,
            r.error.as_deref().unwrap_or("")
        );
    }
    if unconverged {
        return Err(CliError::NonConvergence(
            "some analytic series reached max_order before converging".into(),
        ));
    }
    Ok(rows)
}

fn run_fit(input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let file = File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let rows = if input.extension().is_some_and(|e| e == "json") {
        output::read_json(file)?
    } else {
        output::read_csv(file)?
    };
    let fits = fit_curves(&rows);
    if fits.is_empty() {
        return Err(CliError::Validation("no curve has 4 or more distinct M".into()));
    }
    let mut w = csv::Writer::from_writer(open_output(out)?);
    for f in &fits {
        w.serialize(f).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Run { config, output } => {
            let cfg = customise(config::load_value(&config)?, &output)?;
            sweep_and_write(&[cfg]).map(|_| ())
        }
        Command::Figure { figure, output } => {
            let configs = figure_configs(figure)
                .into_iter()
                .map(|c| {
                    let v = serde_json::to_value(c).expect("preset serialises");
                    customise(v, &output)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rows = sweep_and_write(&configs)?;
            if figure == Figure::Fig3 {
                for f in fit_curves(&rows) {
                    eprintln!("p_sh={:.4} slope={:.4} r2={:.5}", f.p_sh, f.slope, f.r2);
                }
            }
            Ok(())
        }
        Command::Fit { input, out } => run_fit(&input, out.as_deref()),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
