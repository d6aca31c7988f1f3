//! `bh`: desk-scale experiments for iterative projection in Bayes space.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, Settings};
use run::RunError;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "bh", version, about = "Bayes-space projection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian projections of the stereo posterior under two measures.
    StereoProject(CommonArgs),
    /// Iterative Gaussian projection of the stereo posterior.
    StereoIterate(CommonArgs),
    /// Hermite projections of the stereo posterior for orders 2..=basis.
    HermiteSweep(CommonArgs),
    /// Iterative projection with order 2 and order `basis` Hermite bases.
    HermiteIterate(CommonArgs),
    /// Sparse Gaussian variational inference on a synthetic SLAM chain.
    GviDemo(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "bh-output")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Quadrature nodes (grid nodes for stereo, Gauss-Hermite per dimension
    /// for the SLAM demo).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Hermite order.
    #[arg(long)]
    basis: Option<usize>,
    /// Fixed stereo measurement instead of a simulated one.
    #[arg(long)]
    z: Option<f64>,
    /// Plain `key=value` file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Self::StereoProject(a) | Self::StereoIterate(a) | Self::HermiteSweep(a) | Self::HermiteIterate(a) | Self::GviDemo(a) => a,
        }
    }
}

impl CommonArgs {
    fn settings(&self, default_basis: Option<usize>) -> Result<Settings, ConfigError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        if let Some(b) = default_basis {
            if !s.entries().contains_key("basis") {
                s.set("basis", b);
            }
        }
        if let Some(v) = self.seed {
            s.set("seed", v);
        }
        if let Some(v) = self.nodes {
            s.set("nodes", v);
        }
        if let Some(v) = self.max_iters {
            s.set("max_iters", v);
        }
        if let Some(v) = self.tol {
            s.set("tol", format!("{v:?}"));
        }
        if let Some(v) = self.basis {
            s.set("basis", v);
        }
        if let Some(v) = self.z {
            s.set("z", format!("{v:?}"));
        }
        Ok(s)
    }
}

enum Failure {
    Config(String),
    Run(RunError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.0)
    }
}

fn execute(command: &Command) -> Result<Vec<PathBuf>, Failure> {
    let args = command.args();
    if matches!(command, Command::GviDemo(_)) && (args.basis.is_some() || args.z.is_some()) {
        return Err(Failure::Config("--basis and --z apply to stereo experiments only".into()));
    }
    let prepare = |dir: &PathBuf| {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))
    };
    let written = match command {
        Command::GviDemo(a) => {
            let cfg = config::slam_config(&a.settings(None)?)?;
            prepare(&a.out)?;
            run::gvi_demo(&cfg, &a.out)
        }
        Command::HermiteIterate(a) => {
            let cfg = config::stereo_config(&a.settings(Some(4))?)?;
            prepare(&a.out)?;
            run::hermite_iterate(&cfg, &a.out)
        }
        Command::StereoProject(a) | Command::StereoIterate(a) | Command::HermiteSweep(a) => {
            let cfg = config::stereo_config(&a.settings(None)?)?;
            prepare(&a.out)?;
            match command {
                Command::StereoProject(_) => run::stereo_project(&cfg, &a.out),
                Command::StereoIterate(_) => run::stereo_iterate(&cfg, &a.out),
                _ => run::hermite_sweep(&cfg, &a.out),
            }
        }
    };
    written.map_err(Failure::Run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(msg)) => {
            eprintln!("bh: configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(RunError::Io(e))) => {
            eprintln!("bh: i/o error: {e}");
            ExitCode::FAILURE
        }
        Err(Failure::Run(RunError::Numerical(e))) => {
            let report = json!({ "status": "numerical_failure", "error": format!("{e:?}"), "message": e.to_string() });
            let text = serde_json::to_string_pretty(&report).expect("serializable report");
            if let Err(io) = std::fs::write(cli.command.args().out.join("error.json"), format!("{text}\n")) {
                eprintln!("bh: could not write error report: {io}");
            }
            eprintln!("{text}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
