use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use lamlab_cli::commands::{
    cmd_discontinuity_report, cmd_fiber_bound, cmd_flaring_check, cmd_laminations_agree,
    cmd_traintrack_report, Overrides, RunContext,
};
use lamlab_core::config::Config;

/// Train-track maps, lamination languages, and the explicit
/// ending-lamination discontinuity experiment.
#[derive(Parser)]
#[command(name = "lamlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and segment files.
    #[arg(long, default_value = "lamlab-out")]
    out: PathBuf,
    /// Override the configured depths (repeatable).
    #[arg(long = "depth")]
    depths: Vec<usize>,
    /// Override the configured iteration horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the configured trailing stability window.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Direction dynamics, transition matrix, PF data, eigenrays, and
    /// attracting rays for each configured map.
    TraintrackReport(CommonArgs),
    /// Compare the Mitra segment language of a cyclic ray against the dual
    /// lamination of the declared map.
    LaminationsAgree(CommonArgs),
    /// Reproduce the ending-lamination discontinuity example.
    DiscontinuityReport(CommonArgs),
    /// Attracting-ray census against the 2·rank fiber bound.
    FiberBound(CommonArgs),
    /// Verify the (lambda, N0)-flaring inequality over a length table.
    FlaringCheck {
        /// Delimiter-separated rows: index, class, length.
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n0: i64,
        #[arg(long, default_value = "lamlab-out")]
        out: PathBuf,
    },
}

fn run_common(
    args: &CommonArgs,
    run: impl FnOnce(&RunContext) -> Result<lamlab_cli::RunReport>,
) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let config = Config::parse(&text)?;
    let overrides = Overrides {
        depths: (!args.depths.is_empty()).then(|| args.depths.clone()),
        horizon: args.horizon,
        window: args.window,
    };
    let ctx = RunContext::new(config, args.out.clone(), overrides);
    let report = run(&ctx)?;
    let path = report.write(&args.out)?;
    print!("{}", report.summary());
    println!("report: {}", path.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TraintrackReport(args) => run_common(args, cmd_traintrack_report),
        Command::LaminationsAgree(args) => run_common(args, cmd_laminations_agree),
        Command::DiscontinuityReport(args) => run_common(args, cmd_discontinuity_report),
        Command::FiberBound(args) => run_common(args, cmd_fiber_bound),
        Command::FlaringCheck {
            table,
            lambda,
            n0,
            out,
        } => cmd_flaring_check(table, *lambda, *n0, out).map(|r| {
            print!("{}", r.summary());
            r.exit_code()
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
