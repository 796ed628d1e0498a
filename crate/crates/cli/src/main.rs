//! `axipot` experiment runner. Every command writes one CSV table and exits
//! with 0 when all checks pass, 1 when a tolerance check fails and 2 on
//! invalid input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{DataSource, SolveArgs};
use config::{CommonArgs, Defaults, RunConfig};

#[derive(Parser)]
#[command(
    name = "axipot",
    version,
    about = "Potential theory for x1-weighted elliptic operators on half-space domains"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the fundamental solutions for one pair of points
    KernelEval {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        xi: Vec<f64>,
    },
    /// Unit-density double layer at interior, exterior, base and rim probes
    Gauge,
    /// Weighted flux of q1 around interior and exterior poles
    Flux,
    /// Solve the Holmgren problem at the points of a targets file
    Solve {
        /// CSV with header x1,x2,x3
        #[arg(long)]
        targets: PathBuf,
        /// Dirichlet data on the curved surface (theta,phi_angle,value)
        #[arg(long, requires = "base_data", conflicts_with = "case")]
        gamma_data: Option<PathBuf>,
        /// Weighted co-normal data on the base (r,phi_angle,value)
        #[arg(long, requires = "gamma_data")]
        base_data: Option<PathBuf>,
        /// Sample the data from a registered manufactured solution instead
        #[arg(long, required_unless_present = "gamma_data")]
        case: Option<String>,
        /// Surface mesh CSV to use instead of the generated hemisphere
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        write_mesh: Option<PathBuf>,
        #[arg(long)]
        write_operator: Option<PathBuf>,
        /// Write the surface part of the boundary data used
        #[arg(long, requires = "write_base_data")]
        write_gamma_data: Option<PathBuf>,
        /// Write the base part of the boundary data used
        #[arg(long, requires = "write_gamma_data")]
        write_base_data: Option<PathBuf>,
    },
    /// Compare the boundary-element Green's function with the hemisphere closed form
    GreenCheck {
        #[arg(long, default_value_t = 10)]
        pairs: usize,
    },
    /// Manufactured-solution errors on a ladder of doubling meshes
    Convergence {
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Restrict to these cases (repeatable)
        #[arg(long)]
        case: Vec<String>,
    },
    /// Both sides of the energy identity for manufactured solutions
    EnergyCheck {
        #[arg(long)]
        case: Vec<String>,
    },
}

fn defaults(cmd: &Command) -> Defaults {
    match cmd {
        Command::Convergence { .. } => Defaults { n_theta: 8, tol: 1e-2 },
        Command::Gauge | Command::Flux | Command::KernelEval { .. } => Defaults { n_theta: 16, tol: 1e-3 },
        _ => Defaults { n_theta: 16, tol: 1e-2 },
    }
}

fn run(cli: Cli) -> Result<commands::Report, String> {
    let cfg = RunConfig::resolve(&cli.common, defaults(&cli.command))?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    let report = match &cli.command {
        Command::KernelEval { x, xi } => commands::kernel_eval(&cfg, x, xi)?,
        Command::Gauge => commands::gauge(&cfg)?,
        Command::Flux => commands::flux(&cfg)?,
        Command::Solve {
            targets,
            gamma_data,
            base_data,
            case,
            mesh,
            write_mesh,
            write_operator,
            write_gamma_data,
            write_base_data,
        } => {
            let data = match (gamma_data, base_data, case) {
                (Some(g), Some(b), None) => DataSource::Files { gamma: g.clone(), base: b.clone() },
                (None, None, Some(c)) => DataSource::Case(c.clone()),
                _ => return Err("give either --gamma-data with --base-data, or --case".into()),
            };
            let args = SolveArgs {
                targets: targets.clone(),
                data,
                mesh: mesh.clone(),
                write_mesh: write_mesh.clone(),
                write_operator: write_operator.clone(),
                write_data: write_gamma_data.clone().zip(write_base_data.clone()),
            };
            commands::solve(&cfg, &args)?
        }
        Command::GreenCheck { pairs } => commands::green_check(&cfg, *pairs)?,
        Command::Convergence { levels, case } => commands::convergence(&cfg, *levels, case)?,
        Command::EnergyCheck { case } => commands::energy_check(&cfg, case)?,
    };
    match &cfg.output_path {
        Some(path) => std::fs::write(path, &report.csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => std::io::stdout().write_all(report.csv.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(r) if r.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
