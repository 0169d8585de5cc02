//! Monte Carlo BLER simulator CLI.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use grandfade::sim::{self, PartialConfig, SimConfig};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "grandfade",
    version,
    about = "ORBGRAND decoding over fading channels with channel-estimate refinement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a block-error-rate sweep and write CSV or JSON results.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key-value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Code: crc128-112 | capolar128-112 | crc16-8.
    #[arg(long)]
    code: Option<String>,

    /// Constellation: qpsk | qam16.
    #[arg(long = "mod")]
    modulation: Option<String>,

    /// Detector: ml | ml-exact | zf | mmse.
    #[arg(long)]
    detector: Option<String>,

    /// Method: baseline | method1 | method1-weighted | method2 | genie.
    #[arg(long)]
    method: Option<String>,

    /// Channel-estimation-error variance.
    #[arg(long = "sigma-e2")]
    sigma_e2: Option<f64>,

    /// Rician K-factor (linear power ratio; 0 = Rayleigh).
    #[arg(long = "k-factor")]
    k_factor: Option<f64>,

    /// SNR in dB: a single value or START:STEP:STOP.
    #[arg(long, visible_alias = "snr-db")]
    snr: Option<String>,

    /// Monte Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<u64>,

    /// ORBGRAND query budget per candidate decode.
    #[arg(long = "max-queries")]
    max_queries: Option<usize>,

    /// Candidate set: 1 | axis5 | grid9.
    #[arg(long)]
    candidates: Option<String>,

    /// Base seed; every (SNR point, trial) pair derives its own stream.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file for results.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format: csv | json.
    #[arg(long)]
    format: Option<String>,
}

impl SimulateArgs {
    fn into_config(self) -> anyhow::Result<SimConfig> {
        let cli = PartialConfig {
            code: self.code,
            modulation: self.modulation,
            detector: self.detector,
            method: self.method,
            sigma_e2: self.sigma_e2,
            k_factor: self.k_factor,
            snr: self.snr,
            trials: self.trials,
            max_queries: self.max_queries,
            candidates: self.candidates,
            seed: self.seed,
            out: self.out,
            format: self.format,
            ..Default::default()
        };
        let merged = match &self.config {
            Some(path) => {
                let file = PartialConfig::from_file(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                cli.merged_over(file)
            }
            None => cli,
        };
        Ok(merged.build()?)
    }
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let cfg = args.into_config()?;
    eprintln!(
        "# code={} mod={} detector={} method={} candidates={} sigma_e2={} k={} trials={} budget={} seed={}",
        cfg.code.label(),
        cfg.modulation,
        cfg.detector,
        cfg.method,
        cfg.candidates.as_str(),
        cfg.sigma_e2,
        cfg.k_factor,
        cfg.trials,
        cfg.max_queries,
        cfg.seed,
    );
    let started = Instant::now();
    let results = sim::run_sweep_with(&cfg, |point| {
        eprintln!(
            "snr {:>6.2} dB | bler {:.3e} [{:.3e}, {:.3e}] | errors {:>6}/{} | abandoned {:>5} | mean queries {:>12.1}",
            point.snr_db,
            point.bler,
            point.ci_lo,
            point.ci_hi,
            point.block_errors,
            point.trials,
            point.abandon_count,
            point.mean_queries,
        );
    })?;
    eprintln!(
        "# {} points in {:.1} s{}",
        results.len(),
        started.elapsed().as_secs_f64(),
        cfg.out
            .as_ref()
            .map(|p| format!(", results in {}", p.display()))
            .unwrap_or_default()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => run_simulate(args),
    }
}
