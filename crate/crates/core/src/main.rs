use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use besov_ns::experiments::{
    self, emit_csv, parse_config_text, selftest, write_csv, ConfigOverrides, ExperimentKind,
    ExperimentSpec, ResultRow,
};
use besov_ns::Error;

#[derive(Parser)]
#[command(name = "besov-ns", version, about = "Implicit spectral Navier-Stokes experiments on the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step convergence against the manufactured solution.
    Converge(SweepArgs),
    /// Vanishing-viscosity sweep against the Euler solution.
    Viscosity(SweepArgs),
    /// Unforced runs reporting the B^1_{inf,1} growth monitor.
    Stability(SweepArgs),
    /// Structural invariant suites.
    Selftest,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// Comma-separated viscosities.
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    tau: Option<f64>,
    /// Number of halvings of the swept parameter.
    #[arg(long)]
    halvings: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Points per direction.
    #[arg(long)]
    grid: Option<usize>,
    /// Spectral truncation N.
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long = "picard-tol")]
    picard_tol: Option<f64>,
    #[arg(long = "picard-max")]
    picard_max: Option<usize>,
    /// CSV output path; rows go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SweepArgs {
    fn overrides(&self) -> Result<ConfigOverrides, Error> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.clone(),
                    source,
                })?;
                parse_config_text(&text)?
            }
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            nu: self.nu.as_deref().map(experiments::parse_list).transpose()?,
            tau: self.tau,
            halvings: self.halvings,
            horizon: self.horizon,
            grid: self.grid,
            trunc: self.trunc,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            out: self.out.clone(),
        };
        Ok(file.overridden_by(flags))
    }
}

fn sweep(kind: ExperimentKind, args: &SweepArgs) -> Result<Vec<ResultRow>, Error> {
    let spec = args.overrides()?.apply(ExperimentSpec::defaults(kind));
    let rows = match kind {
        ExperimentKind::Converge => experiments::convergence_sweep(&spec)?,
        ExperimentKind::Viscosity => experiments::viscosity_sweep(&spec)?,
        _ => {
            let summary = experiments::stability_check(&spec)?;
            eprintln!("max monitor ratio {:.6}", summary.max_ratio());
            summary.rows
        }
    };
    match &spec.out {
        Some(path) => emit_csv(&rows, path)?,
        None => write_csv(&rows, std::io::stdout().lock()).map_err(|source| Error::Csv {
            path: PathBuf::from("<stdout>"),
            source,
        })?,
    }
    Ok(rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Selftest => {
            let outcomes = selftest::run_all();
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            return if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
        Command::Converge(a) => (ExperimentKind::Converge, a),
        Command::Viscosity(a) => (ExperimentKind::Viscosity, a),
        Command::Stability(a) => (ExperimentKind::Stability, a),
    };
    match sweep(kind, &args) {
        Ok(rows) => {
            for r in rows.iter().filter(|r| r.failed()) {
                eprintln!("cell nu={} tau={} failed: {}", r.nu, r.tau, r.note.as_deref().unwrap_or(""));
            }
            if rows.iter().any(ResultRow::failed) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
