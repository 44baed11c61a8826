//! `momentfd`: run convergence studies, solution dumps and diagnostics for the
//! moment-stabilized finite-difference schemes.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use momentfd::config::ExperimentConfig;
use momentfd::experiment::{run_analyze, run_convergence, run_solve, RunOptions};
use momentfd::problems::{ExampleId, EXAMPLE_NAMES};
use momentfd::Error;

#[derive(Parser, Debug)]
#[command(
    name = "momentfd",
    version,
    about = "Moment-stabilized central finite differences for convection-diffusion and Hamilton-Jacobi problems"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve on a single mesh and write the solution as CSV.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write a gnuplot script.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Run a mesh-refinement study and write one CSV table per scheme.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Mesh list (nodes per dimension) when no config is given.
        #[arg(long, value_delimiter = ',')]
        meshes: Vec<usize>,
        /// Include the config's finer `full-meshes` rows.
        #[arg(long)]
        full: bool,
    },
    /// Print matrix properties, contraction constants and root regimes.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Use iterative eigenvalue estimates instead of dense factorizations.
        #[arg(long)]
        estimate: bool,
    },
    /// List the built-in examples.
    ListExamples,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Example name when no config is given (see list-examples).
    #[arg(long)]
    example: Option<String>,
    /// Diffusion coefficient for examples that take one.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Scheme name, or the name of one column of the config.
    #[arg(long)]
    scheme: Option<String>,
    /// Single mesh (nodes per dimension).
    #[arg(long)]
    mesh: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self, default_meshes: Vec<usize>) -> momentfd::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.example) {
            (Some(path), None) => {
                if self.epsilon.is_some() {
                    return Err(Error::Configuration(
                        "--epsilon cannot be combined with --config".into(),
                    ));
                }
                ExperimentConfig::load(path)?
            }
            (None, Some(example)) => {
                let meshes = match self.mesh {
                    Some(j) => vec![j],
                    None => default_meshes,
                };
                if meshes.is_empty() {
                    return Err(Error::Configuration(
                        "pass --mesh or --meshes with --example".into(),
                    ));
                }
                ExperimentConfig::from_parts(
                    example,
                    self.epsilon,
                    self.scheme.as_deref().unwrap_or("moment-bc1"),
                    meshes,
                )?
            }
            (Some(_), Some(_)) => {
                return Err(Error::Configuration(
                    "pass either --config or --example, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Configuration(
                    "pass --config <file> or --example <name>".into(),
                ))
            }
        };
        if let (Some(s), Some(_)) = (&self.scheme, &self.config) {
            cfg.select_scheme(s)?;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            mesh: self.mesh,
            ..RunOptions::default()
        }
    }
}

/// Exit status for a library error: 2 configuration, 3 solver failure, 4
/// unsupported analysis, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Configuration(_)
        | Error::UnknownExample(_)
        | Error::InvalidGrid(_)
        | Error::OutOfRange { .. }
        | Error::StencilOutOfDomain { .. }
        | Error::DimensionMismatch { .. }
        | Error::MissingDerivative(_) => 2,
        Error::SingularSystem { .. } | Error::Divergence { .. } | Error::NonConvergence { .. } => 3,
        Error::UnsupportedAnalysis(_) => 4,
        Error::Io(_) => 1,
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> momentfd::Result<u8> {
    match cli.command {
        Command::ListExamples => {
            for name in EXAMPLE_NAMES {
                let id: ExampleId = name.parse()?;
                println!("{name:8} {}", id.description());
            }
            Ok(0)
        }
        Command::Convergence {
            common,
            meshes,
            full,
        } => {
            let cfg = common.load(meshes)?;
            let opts = RunOptions {
                full,
                ..common.options()
            };
            let table = run_convergence(&cfg, &opts)?;
            print!("{}", table.summary());
            report_written(&table.write(&common.out_dir(&cfg), &cfg.stem())?);
            if table.any_not_converged() {
                eprintln!("error: some meshes did not converge (marked NC)");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Solve { common, gnuplot } => {
            let cfg = common.load(Vec::new())?;
            let art = run_solve(&cfg, &common.options())?;
            for c in &art.columns {
                println!(
                    "{}: converged = {}, residual = {:.3e}, iterations = {:?}, time = {:.3?}",
                    c.label,
                    c.report.converged,
                    c.report.residual,
                    c.report.stage_iterations,
                    c.report.wall_time
                );
            }
            let paths = art.write(
                &common.out_dir(&cfg),
                &cfg.stem(),
                gnuplot || cfg.output.gnuplot,
            )?;
            report_written(&paths);
            if art.any_not_converged() {
                for c in art.columns.iter().filter(|c| !c.report.converged) {
                    eprintln!(
                        "error: {} stopped at stage {:?}",
                        c.label, c.report.failed_stage
                    );
                }
                return Ok(3);
            }
            Ok(0)
        }
        Command::Analyze { common, estimate } => {
            let cfg = common.load(Vec::new())?;
            let opts = RunOptions {
                estimate,
                ..common.options()
            };
            let rep = run_analyze(&cfg, &opts)?;
            print!("{}", rep.text);
            if let Some(msg) = rep.unsupported {
                eprintln!("error: {msg}");
                return Ok(4);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
