//! helixlab — constant-angle ruled surfaces from the command line.
//!
//! Subcommands ingest a job config (TOML, or the `builtin:example-5.1`
//! preset) and emit CSV tables, verification reports, and OBJ meshes.
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! input or numeric errors.

mod angle;
mod commands;
mod config;
mod mesh;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Clone, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

#[derive(Parser)]
#[command(name = "helixlab", version, about = "constant-angle ruled surface toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Config file path, or the literal `builtin:example-5.1`.
    #[arg(long)]
    config: String,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution override, e.g. `60x20`.
    #[arg(long)]
    grid: Option<String>,
    /// Constancy tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Frame vectors and curvatures along the curve, as CSV.
    Frenet(CommonArgs),
    /// Constancy report of a frame vector against a fixed direction.
    Slant(CommonArgs),
    /// Evaluate the configured surface on a grid, as CSV.
    SurfaceGen(CommonArgs),
    /// Fundamental forms over the grid, as CSV plus a summary.
    SurfaceReport(CommonArgs),
    /// Integrate a geodesic and write the trace as CSV.
    Geodesic(CommonArgs),
    /// Integrate a line of curvature and write the trace as CSV.
    CurvatureLine(CommonArgs),
    /// Run the checks that apply to the configured object.
    Verify(VerifyArgs),
    /// Tessellate the surface and write an OBJ mesh.
    Mesh(CommonArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Run a single check by id instead of all applicable ones.
    #[arg(long)]
    check: Option<String>,
}

fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::input(format!("--grid: expected NxM, got `{text}`")))?;
    let nu: usize = a
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("--grid: bad first dimension `{a}`")))?;
    let nv: usize = b
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("--grid: bad second dimension `{b}`")))?;
    if nu < 2 || nv < 2 {
        return Err(CliError::input("--grid: need at least 2 samples per direction"));
    }
    Ok((nu, nv))
}

fn job_from(common: &CommonArgs) -> Result<config::Job, CliError> {
    let raw = config::load_raw(&common.config)?;
    let mut job = config::build_job(raw, &common.config)?;
    if let Some(out) = &common.out {
        job.out_dir = out.clone();
    }
    if let Some(grid) = &common.grid {
        job.grid = parse_grid(grid)?;
    }
    if let Some(tol) = common.tol {
        if !(tol > 0.0) {
            return Err(CliError::input("--tol: must be positive"));
        }
        job.constancy_tol = Some(tol);
    }
    Ok(job)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Frenet(c) => commands::cmd_frenet(&job_from(c)?),
        Command::Slant(c) => commands::cmd_slant(&job_from(c)?),
        Command::SurfaceGen(c) => commands::cmd_surface_gen(&job_from(c)?),
        Command::SurfaceReport(c) => commands::cmd_surface_report(&job_from(c)?),
        Command::Geodesic(c) => commands::cmd_geodesic(&job_from(c)?),
        Command::CurvatureLine(c) => commands::cmd_curvature_line(&job_from(c)?),
        Command::Mesh(c) => commands::cmd_mesh(&job_from(c)?),
        Command::Verify(v) => {
            let job = job_from(&v.common)?;
            let ok = commands::cmd_verify(&job, v.check.as_deref())?;
            if ok {
                Ok(())
            } else {
                Err(CliError::VerifyFailed)
            }
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HELIXLAB_THREADS") {
        match threads.trim().parse::<usize>() {
            Ok(n) if n >= 1 => helixlab_core::configure_threads(n),
            _ => {
                eprintln!("error: HELIXLAB_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerifyFailed) => {
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
