use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::models::{run_all, Model};
use super::scenario::{parse_scenarios, Output, Scenario};
use super::RunError;
use crate::par::Execution;

#[derive(Debug, Parser)]
#[command(name = "bubblelab", version, about = "Run rational bubble model scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Scenario file
    pub file: PathBuf,
    /// Directory for output files
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Override every scenario's horizon
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Override every scenario's seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep execution strategy
    #[arg(long, value_enum)]
    pub exec: Option<ExecArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every scenario in a file
    Run(RunArgs),
    /// Run only the sweep scenarios in a file
    Sweep(RunArgs),
    /// Parse and validate a scenario file without running it
    Validate { file: PathBuf },
    /// List the available models and their sweep statistics
    ListModels,
}

fn load(file: &Path) -> Result<Vec<Scenario>, RunError> {
    let text = std::fs::read_to_string(file).map_err(|source| RunError::Io {
        path: file.to_path_buf(),
        source,
    })?;
    Ok(parse_scenarios(&text)?)
}

fn apply_overrides(scenarios: &mut [Scenario], args: &RunArgs) {
    for s in scenarios {
        if let Some(h) = args.horizon {
            s.horizon = h;
        }
        if let Some(seed) = args.seed {
            s.seed = Some(seed);
        }
    }
}

/// Executes a parsed command, returning what to print on success.
pub fn execute(cli: Cli) -> Result<String, RunError> {
    match cli.command {
        Command::ListModels => Ok(Model::ALL
            .iter()
            .map(|m| {
                format!(
                    "{:<22} {}\n{:<22} sweep stats: {}\n",
                    m.name(),
                    m.description(),
                    "",
                    m.sweep_stats().join(", ")
                )
            })
            .collect()),
        Command::Validate { file } => {
            let scenarios = load(&file)?;
            Ok(scenarios
                .iter()
                .map(|s| format!("ok {} ({})\n", s.name, s.model.name()))
                .collect())
        }
        Command::Run(args) => run(args, false),
        Command::Sweep(args) => run(args, true),
    }
}

fn run(args: RunArgs, sweeps_only: bool) -> Result<String, RunError> {
    let mut scenarios = load(&args.file)?;
    if sweeps_only {
        scenarios.retain(|s| s.outputs.contains(&Output::Sweep));
    }
    apply_overrides(&mut scenarios, &args);
    // overrides can invalidate a scenario, so check again
    let text: String = scenarios.iter().map(super::serialize_scenario).collect::<Vec<_>>().join("\n");
    if !scenarios.is_empty() {
        parse_scenarios(&text)?;
    }
    let exec = match args.exec {
        Some(ExecArg::Sequential) => Execution::Sequential,
        Some(ExecArg::Parallel) => Execution::Parallel,
        None => Execution::default(),
    };
    let artifacts = run_all(&scenarios, &args.out_dir, exec)?;
    let mut out = String::new();
    for art in &artifacts {
        for (name, _) in &art.files {
            out.push_str(&format!("wrote {}\n", args.out_dir.join(name).display()));
        }
    }
    Ok(out)
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
