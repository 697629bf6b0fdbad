use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bestarm::harness::audit::run_audit;
use bestarm::harness::{
    kl_suite, osmd_suite, run_experiment, AuditConfig, Check, ExperimentConfig,
};
use bestarm::Error;

const EXIT_GATE_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bestarm",
    version,
    about = "Best arm retention experiments and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and check its closed-form guarantee.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output path in the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the thread count in the config file.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Run the property suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 20_240_901)]
        seed: u64,
    },
    /// Estimate both sides of the likelihood-ratio inequality.
    AuditLb {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Kl,
    Osmd,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_GATE_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => ExitCode::from(EXIT_GATE_FAILED),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}

fn execute(command: Command) -> bestarm::Result<bool> {
    match command {
        Command::Run {
            config,
            seed,
            out,
            parallelism,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_path = Some(out);
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            let output = run_experiment(&cfg)?;
            print!("{}", output.summary);
            if let Some(path) = &cfg.output_path {
                println!(
                    "wrote {} records to {}",
                    output.records.len(),
                    path.display()
                );
            }
            Ok(output.summary.passed())
        }
        Command::Verify { suite, seed } => {
            let mut checks: Vec<Check> = Vec::new();
            if matches!(suite, Suite::Kl | Suite::All) {
                checks.extend(kl_suite(seed)?);
            }
            if matches!(suite, Suite::Osmd | Suite::All) {
                checks.extend(osmd_suite(seed)?);
            }
            for check in &checks {
                println!("{check}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::AuditLb { config } => {
            let cfg = AuditConfig::load(&config)?;
            let report = run_audit(&cfg)?;
            println!("lhs  {:.6} ± {:.6}", report.lhs, report.lhs_std_error);
            println!("rhs  {:.6} ± {:.6}", report.rhs, report.rhs_std_error);
            println!(
                "event probability: {:.5} under mu, {:.5} under mu'{}",
                report.event_prob_mu,
                report.event_prob_mu_prime,
                if report.boundary {
                    " (boundary estimate)"
                } else {
                    ""
                }
            );
            println!(
                "{} lhs + 3SE >= rhs - 3SE",
                if report.passed() { "PASS" } else { "FAIL" }
            );
            Ok(report.passed())
        }
    }
}
