use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

/// Hyperviscous Navier–Stokes solver and verification lab.
#[derive(Parser, Debug)]
#[command(name = "hvns", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Run configuration (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate and write snapshots plus norms.csv.
    Simulate(Common),
    /// Integrate and check every a-priori bound along the run.
    Verify(Common),
    /// Strong convergence of the regularized runs as eps decreases.
    SweepEps(Common),
    /// Semidistance between attractor proxies for each eps.
    AttractorDist(Common),
    /// Attractor proxies under a forcing perturbation delta(eps).
    Perturbed(Common),
    /// Quick closed-form checks of every module.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("HVNS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not cap the thread pool at {n}: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(c) => commands::simulate(&c.config, &c.out),
        Command::Verify(c) => commands::verify(&c.config, &c.out),
        Command::SweepEps(c) => commands::sweep_eps(&c.config, &c.out),
        Command::AttractorDist(c) => commands::attractor_dist(&c.config, &c.out),
        Command::Perturbed(c) => commands::perturbed(&c.config, &c.out),
        Command::Selftest { out } => commands::selftest(&out),
    };
    match result {
        Ok(report) => {
            for e in &report.entries {
                let status = if e.pass { "PASS" } else { "FAIL" };
                println!("{status} {} (margin {:e})", e.name, e.margin);
            }
            let failed: Vec<&str> = report.failures().map(|e| e.name.as_str()).collect();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
