//! `cab`: run countable-armed bandit experiments, reproduce the reference
//! figures, evaluate bound constants, and plot aggregate CSVs.

pub mod bounds;
pub mod config;
pub mod figures;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use cab_core::engine::{run_experiment, ExperimentOutput};
use clap::{Parser, Subcommand};

use crate::config::{seed_from_env, ExperimentConfig};
use crate::figures::Figure;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    error: anyhow::Error,
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            error: anyhow!("{msg}"),
        }
    }

    pub fn io(msg: impl fmt::Display) -> Self {
        CliError {
            code: EXIT_IO,
            error: anyhow!("{msg}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for CliError {}

impl From<cab_core::CabError> for CliError {
    fn from(e: cab_core::CabError) -> Self {
        CliError::config(e)
    }
}

trait IoContext<T> {
    fn io_context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T, E> IoContext<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn io_context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.with_context(what).map_err(|error| CliError {
            code: EXIT_IO,
            error,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "cab", version, about = "Countable-armed bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a built-in figure configuration and plot it.
    Repro {
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = figures::DEFAULT_REPLICATIONS)]
        reps: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate bound constants.
    Bounds(bounds::BoundsArgs),
    /// Render an aggregate CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_end();
            return Err(CliError::config(
                text.strip_prefix("error: ").unwrap_or(text),
            ));
        }
    };
    match cli.command {
        Command::Simulate {
            config,
            out,
            threads,
        } => simulate(&config, out.as_deref(), threads_or_default(threads)),
        Command::Repro {
            figure,
            out,
            reps,
            threads,
        } => repro(&figure, &out, reps, threads_or_default(threads)),
        Command::Bounds(args) => {
            let text = bounds::run(&args)?;
            print!("{text}");
            Ok(())
        }
        Command::Plot { input, out } => plot(&input, &out),
    }
}

fn threads_or_default(threads: Option<usize>) -> usize {
    threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).io_context(|| format!("creating {}", dir.display()))
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .io_context(|| format!("creating {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).io_context(|| format!("writing {}", path.display()))
}

fn write_outputs(dir: &Path, output: &ExperimentOutput) -> Result<(), CliError> {
    output::write_raw(create_file(&dir.join("raw.csv"))?, &output.raw)?;
    output::write_aggregate(create_file(&dir.join("aggregate.csv"))?, &output.curves)
}

fn simulate(config_path: &Path, out: Option<&Path>, threads: usize) -> Result<(), CliError> {
    let config = ExperimentConfig::load(config_path)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::config("no output directory: pass --out or set output_dir"))?;
    let plan = config.plan_with_seed(seed_from_env()?);
    let output = run_experiment(&plan, threads)?;
    create_dir(&dir)?;
    write_outputs(&dir, &output)
}

fn repro(tag: &str, out: &Path, reps: u64, threads: usize) -> Result<(), CliError> {
    let figure: Figure = tag.parse()?;
    if reps < figures::MIN_REPLICATIONS {
        return Err(CliError::config(format!(
            "--reps {reps} is below the minimum of {}",
            figures::MIN_REPLICATIONS
        )));
    }
    let mut config = figure.config(reps);
    if let Some(seed) = seed_from_env()? {
        config.master_seed = seed;
    }
    let output = figure.run(&config, threads)?;
    create_dir(out)?;
    write_text(&out.join("config.json"), &(config.to_json() + "\n"))?;
    write_outputs(out, &output)?;
    write_text(
        &out.join(format!("{}.svg", figure.tag())),
        &plot::render(&output.curves, figure.title()),
    )
}

fn plot(input: &Path, out: &Path) -> Result<(), CliError> {
    let file = File::open(input).io_context(|| format!("opening {}", input.display()))?;
    let curves = output::read_aggregate(std::io::BufReader::new(file))?;
    let title = input
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    write_text(out, &plot::render(&curves, &title))
}
