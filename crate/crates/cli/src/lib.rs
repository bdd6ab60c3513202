//! Command-line driver for `hetnet-core`: analytic, Monte Carlo, comparison,
//! sweep, activity and critical-point jobs written as CSV.

pub mod error;
pub mod job;
pub mod run;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use hetnet_core::Scenario;

pub use error::CliError;
pub use job::{parse_modes, preset, Axis, Command, JobSpec, Metric, Range};
pub use run::{comment_block, run, write_csv, Row, HEADER};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hetnet",
    version,
    about = "Coverage of two-tier cognitive femto/macro networks"
)]
pub struct Args {
    /// analytic, simulate, compare, sweep, activity or critical-point.
    /// Optional with --preset.
    pub command: Option<String>,
    /// Scenario file in `key = value` form; missing keys keep defaults.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials (cells for `activity`).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// r_m, lambda_M, lambda_F, N_F or beta.
    #[arg(long)]
    pub axis: Option<String>,
    /// Inclusive LO:HI:STEP.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// co-channel, orthogonal, partial, a comma list, or all.
    #[arg(long)]
    pub mode: Option<String>,
    /// fig3 .. fig10.
    #[arg(long)]
    pub preset: Option<String>,
}

fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    Scenario::parse(&text).map_err(|e| match e {
        hetnet_core::Error::Parse { line, message } => {
            CliError::invalid(format!("{}:{line}: {message}", path.display()))
        }
        other => other.into(),
    })
}

/// Builds the job from parsed flags: preset first, then the scenario file,
/// then explicit flags.
pub fn job_from_args(args: &Args) -> Result<JobSpec, CliError> {
    let mut job = match &args.preset {
        Some(name) => {
            let j = preset(name)?;
            if let Some(c) = &args.command {
                let c: Command = c.parse()?;
                if c != j.command {
                    return Err(CliError::invalid(format!(
                        "preset {name} runs '{}', not '{}'",
                        j.command.as_str(),
                        c.as_str()
                    )));
                }
            }
            j
        }
        None => {
            let c = args
                .command
                .as_deref()
                .ok_or_else(|| CliError::invalid("a command or --preset is required"))?;
            JobSpec::new(c.parse()?)
        }
    };
    if let Some(path) = &args.scenario {
        job.scenario = read_scenario(path)?;
        if args.preset.is_none() {
            job.modes = vec![job.scenario.spectrum.mode];
        }
    }
    if let Some(m) = &args.mode {
        job.modes = parse_modes(m)?;
    }
    if let Some(s) = args.seed {
        job.seed = s;
    }
    if let Some(t) = args.trials {
        job.trials = t;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::invalid("--threads must be positive"));
        }
        job.threads = Some(t);
    }
    if let Some(a) = &args.axis {
        job.axis = Some(a.parse()?);
    }
    if let Some(r) = &args.range {
        job.range = Some(r.parse()?);
    }
    Ok(job)
}

/// Runs the job on its own thread pool and writes the CSV.
pub fn execute(job: &JobSpec, out: Option<&Path>) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = job.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    let rows = pool.install(|| run(job))?;
    log::info!("{} rows", rows.len());
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(job, &rows, &mut buf)?;
            fs::write(path, buf).map_err(CliError::io(path))
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(job, &rows, stdout.lock())
        }
    }
}

/// Sidecar path for diagnostics: `<out>.log`.
pub fn log_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".log");
    PathBuf::from(s)
}

/// Full CLI entry point; returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let job = match job_from_args(args) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&job, args.out.as_deref()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == 3 {
                if let Some(out) = &args.out {
                    let path = log_path(out);
                    if let Err(io) = write_diagnostics(&path, &job, &e) {
                        eprintln!("error: could not write {}: {io}", path.display());
                    }
                }
            }
            code
        }
    }
}

fn write_diagnostics(path: &Path, job: &JobSpec, err: &CliError) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "error: {err}")?;
    let mut source = std::error::Error::source(err);
    while let Some(s) = source {
        writeln!(f, "caused by: {s}")?;
        source = s.source();
    }
    writeln!(f, "{err:?}")?;
    f.write_all(comment_block(job).as_bytes())
}
