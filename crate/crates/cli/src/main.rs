use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vecsim::harness::{cmd_simulate, cmd_sweep, cmd_train, cmd_validate, SweepAxis, SweepRequest};
use vecsim::validate::default_solver;
use vecsim::{Policy, RatKind, SimConfig};

#[derive(Parser)]
#[command(name = "vecsim", version, about = "Cache-enabled vehicular edge network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed. For `simulate` and `sweep` it replaces the configured seed list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train the placement agent.
    Train(Common),
    /// Run seeded episodes with the configured policy and RAT.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trained model, required when the policy is cpp.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Sweep one configuration axis across policies and RATs.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// cache_size (content units), content_size (kilobits) or num_cvs.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Defaults to the configured policy.
        #[arg(long, value_delimiter = ',')]
        policies: Vec<String>,
        /// Defaults to the configured RAT.
        #[arg(long, value_delimiter = ',')]
        rats: Vec<String>,
    },
    /// Run the oracle suites.
    Validate(Common),
}

fn load(common: &Common) -> vecsim::Result<SimConfig> {
    let cfg = match &common.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn seeds(cfg: &SimConfig, common: &Common) -> Vec<u64> {
    common.seed.map_or_else(|| cfg.seeds.clone(), |s| vec![s])
}

fn run(cli: Cli) -> vecsim::Result<bool> {
    match cli.command {
        Command::Train(common) => {
            let cfg = load(&common)?;
            let art = cmd_train(&cfg, common.seed.unwrap_or(0), &common.out)?;
            if let Some(last) = art.curve.last() {
                println!("epoch {} mean_return {:.4}", last.epoch, last.mean_return);
            }
            println!("model: {}", art.model_path.display());
            println!("curve: {}", art.curve_path.display());
        }
        Command::Simulate { common, model } => {
            let cfg = load(&common)?;
            for s in cmd_simulate(&cfg, model.as_deref(), &seeds(&cfg, &common), &common.out)? {
                let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
                println!(
                    "seed {} chr {} delay {} violations% {}",
                    s.seed,
                    fmt(s.chr),
                    fmt(s.mean_delay),
                    fmt(s.violation_pct)
                );
            }
        }
        Command::Sweep { common, axis, values, policies, rats } => {
            let cfg = load(&common)?;
            let policies = if policies.is_empty() {
                vec![cfg.policy]
            } else {
                policies.iter().map(|p| p.parse::<Policy>()).collect::<vecsim::Result<_>>()?
            };
            let rats = if rats.is_empty() {
                vec![cfg.rat]
            } else {
                rats.iter().map(|r| r.parse::<RatKind>()).collect::<vecsim::Result<_>>()?
            };
            let req = SweepRequest {
                axis: axis.parse::<SweepAxis>()?,
                values,
                policies,
                rats,
                seeds: seeds(&cfg, &common),
                train_seed: common.seed.unwrap_or(0),
            };
            let rows = cmd_sweep(&cfg, &req, &common.out)?;
            println!("{} rows written to {}", rows.len(), common.out.join("sweep.csv").display());
        }
        Command::Validate(_) => {
            let (ok, reports) = cmd_validate(default_solver);
            for r in &reports {
                println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
