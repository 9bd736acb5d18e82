mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use toc_core::harness::{run_scenario, sweep};
use toc_core::metrics::{ChannelKind, MetricsReport};
use toc_core::verify::verify_all;

use config::ScenarioArgs;
use output::{metrics_csv, run_paths, sweep_csv, sweep_path, trajectory_csv, write_atomic};

/// Time-optimal control of discrete integrator chains: verification suites
/// and tracking-differentiator experiments.
#[derive(Debug, Parser)]
#[command(name = "toc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity, matrix, geometry and regulation suites.
    Verify {
        /// Largest chain order to check (2..=8).
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..=8))]
        max_m: u64,
        /// Largest index to check (1..=50).
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..=50))]
        max_k: u64,
    },
    /// Simulate one scenario and write its trajectory and metrics.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Run a scenario over every (n0, gsm) pair and write one metrics row each.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Filter factors, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n0_values: Vec<f64>,
        /// Relative noise amplitudes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        gsm_values: Vec<f64>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Verify { max_m, max_k } => cmd_verify(max_m as usize, max_k),
        Command::Run { scenario } => cmd_run(&scenario),
        Command::Sweep { scenario, n0_values, gsm_values } => cmd_sweep(&scenario, &n0_values, &gsm_values),
    }
}

fn cmd_verify(max_m: usize, max_k: u64) -> Result<()> {
    let report = verify_all(max_m, max_k)?;
    println!("{:<36} {:>9} {:>7}", "suite", "passed", "failed");
    for s in &report.suites {
        println!("{:<36} {:>9} {:>7}", s.id, s.passed, s.failed);
    }
    let failures: Vec<_> = report.suites.iter().filter(|s| s.failed > 0).collect();
    for s in &failures {
        eprintln!("{}: first failure: {}", s.id, s.first_failure.as_deref().unwrap_or("?"));
    }
    if !failures.is_empty() {
        bail!("{} of {} checks failed", report.total_failed(), report.total_passed() + report.total_failed());
    }
    println!("all {} checks passed (m <= {max_m}, k <= {max_k})", report.total_passed());
    Ok(())
}

fn print_metrics(report: &MetricsReport) {
    println!("{:<8} {:>12} {:>16} {:>14}", "signal", "lag_steps", "amplitude_ratio", "residual_rms");
    for c in &report.channels {
        let name = match c.kind {
            ChannelKind::Raw => format!("x{}", c.channel),
            ChannelKind::Compensated => format!("xhat{}", c.channel),
        };
        println!("{name:<8} {:>12.4} {:>16.6} {:>14.6e}", c.lag_steps, c.amplitude_ratio, c.residual_rms);
    }
}

fn cmd_run(args: &ScenarioArgs) -> Result<()> {
    let scenario = args.resolve()?;
    let out = run_scenario(&scenario).context("running scenario")?;
    let paths = run_paths(&scenario.output.dir(), scenario.output.name());
    write_atomic(&paths.trajectory, &trajectory_csv(&out)?)?;
    write_atomic(&paths.metrics, &metrics_csv(&out.metrics)?)?;
    print_metrics(&out.metrics);
    eprintln!("wrote {} and {}", paths.trajectory.display(), paths.metrics.display());
    Ok(())
}

fn cmd_sweep(args: &ScenarioArgs, n0_values: &[f64], gsm_values: &[f64]) -> Result<()> {
    let base = args.resolve()?;
    let rows = sweep(&base, n0_values, gsm_values).context("running sweep")?;
    let path = sweep_path(&base.output.dir(), base.output.name());
    write_atomic(&path, &sweep_csv(&rows)?)?;
    println!("{:>8} {:>8} {:>12} {:>12} {:>14} {:>14}", "n0", "gsm", "x1_lag", "xhat1_lag", "x1_rms", "x2_rms");
    for row in &rows {
        let raw = |i| row.metrics.raw(i);
        println!(
            "{:>8} {:>8} {:>12.4} {:>12.4} {:>14.6e} {:>14.6e}",
            row.n0,
            row.gsm,
            raw(1).map_or(f64::NAN, |c| c.lag_steps),
            row.metrics.compensated(1).map_or(f64::NAN, |c| c.lag_steps),
            raw(1).map_or(f64::NAN, |c| c.residual_rms),
            raw(2).map_or(f64::NAN, |c| c.residual_rms),
        );
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}
