use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use viscofront::config::{OutputFormat, RunConfig, TaskKind};
use viscofront::run::{exit_code, run, RunOptions};

/// Wavefront Green's functions of viscoelastic media.
#[derive(Parser)]
#[command(name = "viscofront", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration (optional for `verify`, which then uses the built-in catalog).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Agreement tolerance between independent routes.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Attenuation, dispersion, phase speed and g(t).
    Curves,
    /// Green's function u(t, x).
    Greens,
    /// Wavefront report and kernel H(r, tau).
    Wavefront,
    /// Run the invariant suite; exits 4 when a gating check fails.
    Verify,
    /// Relaxation modulus from a creep compliance.
    Duality,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let task = match cli.command {
        Command::Curves => TaskKind::Curves,
        Command::Greens => TaskKind::Greens,
        Command::Wavefront => TaskKind::Wavefront,
        Command::Verify => TaskKind::Verify,
        Command::Duality => TaskKind::Duality,
    };
    if let Some(n) = cli.threads {
        if n == 0
            || rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_err()
        {
            eprintln!("error: --threads must be a positive integer");
            return ExitCode::from(2);
        }
    }
    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None if task == TaskKind::Verify => RunConfig::default(),
        None => {
            eprintln!("error: --config is required for `{}`", task.as_str());
            return ExitCode::from(2);
        }
    };
    let options = RunOptions {
        out: cli.out,
        tol: cli.tol,
        format: cli.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
    };
    match run(&config, task, &options) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.verified == Some(false) {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
