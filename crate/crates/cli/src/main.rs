use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hn_audit::{config, run, write_outputs, Campaign, Overrides, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "hn-audit", version, about = "Run verification campaigns for the Heisenberg-group Hartree toolkit")]
struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Campaigns to run (repeatable)
    #[arg(long, value_enum, num_args = 1..)]
    campaign: Vec<Campaign>,
    /// Complex dimension of H^n
    #[arg(short = 'n')]
    n: Option<usize>,
    /// Riesz exponent mu in (0, 2n+2)
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory for report.json and the CSV tables
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tabulated Robin function for the reduced system
    #[arg(long)]
    robin_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Overrides {
        campaigns: cli.campaign,
        n: cli.n,
        mu: cli.mu,
        seed: cli.seed,
        samples: cli.samples,
        out: cli.out,
        robin_csv: cli.robin_csv,
    };
    let cfg = match config::load(cli.config.as_deref(), &flags).and_then(|c| c.prepare_output().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let out = run(&cfg);
    for c in &out.report.campaigns {
        let failed: Vec<&str> = c.checks.iter().filter(|k| !k.passed()).map(|k| k.name.as_str()).collect();
        let secs = out.report.timings.get(&c.name).copied().unwrap_or(0.0);
        if failed.is_empty() {
            eprintln!("{:<10} pass  ({} checks, {secs:.1}s)", c.name, c.checks.len());
        } else {
            eprintln!("{:<10} FAIL  {} ({secs:.1}s)", c.name, failed.join(", "));
        }
    }
    if let Err(e) = write_outputs(&out, &cfg.output_path) {
        eprintln!("cannot write outputs to {}: {e}", cfg.output_path.display());
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(out.exit_code() as u8)
}
