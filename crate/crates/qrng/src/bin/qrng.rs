use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdi_qrng::commands;
use sdi_qrng::config::RunConfig;
use sdi_qrng::error::Error;

/// Semi-device-independent QRNG: protocol stages as subcommands.
#[derive(Parser)]
#[command(name = "qrng", version, about)]
struct Cli {
    /// JSON configuration file; defaults are the tabletop-experiment values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed (also settable via QRNG_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the Monte-Carlo protocol; write stats.json and raw.bits.
    Simulate {
        #[arg(long, default_value = "stats.json")]
        stats: PathBuf,
        #[arg(long, default_value = "raw.bits")]
        raw: PathBuf,
        /// Number of simulated rounds (defaults to the config value).
        #[arg(long)]
        rounds: Option<u64>,
    },
    /// Bound C and the extractable length from stats.json.
    Bound {
        #[arg(long, default_value = "stats.json")]
        stats: PathBuf,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Toeplitz-extract final bits from raw.bits at the certified rate.
    Extract {
        #[arg(long, default_value = "raw.bits")]
        raw: PathBuf,
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
        /// Seed bits for the Toeplitz matrix (QRNGBITS file).
        #[arg(long = "seed-bits", default_value = "seed.bits")]
        seed_bits: PathBuf,
        #[arg(long, default_value = "final.bits")]
        out: PathBuf,
        #[arg(long, default_value = "ledger.json")]
        ledger: PathBuf,
        /// Input block size in bits.
        #[arg(long, default_value_t = 1 << 20)]
        block: usize,
    },
    /// Run the four statistical tests on a QRNGBITS file.
    Randtest {
        #[arg(long, default_value = "final.bits")]
        bits: PathBuf,
        #[arg(long, default_value = "randtest.json")]
        out: PathBuf,
        /// Block length for the block-frequency test.
        #[arg(long = "block-len")]
        block_len: Option<usize>,
    },
    /// Numerically verify the security bounds on random instances.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long = "sweep-seed", default_value_t = 1)]
        sweep_seed: u64,
        #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
        tolerance: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value = "verdicts.csv")]
        out: PathBuf,
    },
    /// Reproduce the published intensity/misalignment table.
    Table {
        #[arg(long, default_value = "table.csv")]
        out: PathBuf,
        #[arg(long)]
        rounds: Option<u64>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_env_seed()?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, Error> {
    let mut cfg = load_config(&cli)?;
    match cli.cmd {
        Cmd::Simulate { stats, raw, rounds } => {
            if let Some(r) = rounds {
                cfg.n_rounds = r;
            }
            let doc = commands::cmd_simulate(&cfg, &stats, &raw)?;
            println!(
                "simulated {} rounds: {} raw bits, ge = [{}]",
                cfg.n_rounds,
                doc.n_raw_bits,
                doc.ge
                    .iter()
                    .map(|g| g.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into()))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(0)
        }
        Cmd::Bound { stats, report } => {
            let rep = commands::cmd_bound(&cfg, &stats, &report)?;
            match rep.aborted {
                None => {
                    println!(
                        "C >= {:.6}, p_guess <= {:.6}, l = {} bits, rate = {:.1} bps",
                        rep.c_bound, rep.p_guess, rep.length_bits, rep.rate_bps
                    );
                    Ok(0)
                }
                Some(reason) => {
                    eprintln!("protocol aborted: {reason}");
                    Ok(3)
                }
            }
        }
        Cmd::Extract {
            raw,
            report,
            seed_bits,
            out,
            ledger,
            block,
        } => {
            let led = commands::cmd_extract(&cfg, &raw, &report, &seed_bits, &out, &ledger, block)?;
            println!(
                "extracted {} bits (net expansion {})",
                led.bits_produced, led.net_expansion
            );
            Ok(0)
        }
        Cmd::Randtest {
            bits,
            out,
            block_len,
        } => {
            let reports = commands::cmd_randtest(&bits, &out, block_len)?;
            for r in &reports {
                println!(
                    "{:<20} p = {:.6} [{}]",
                    r.test_name,
                    r.p_value,
                    if r.passed { "pass" } else { "FAIL" }
                );
            }
            Ok(0)
        }
        Cmd::Verify {
            samples,
            sweep_seed,
            tolerance,
            grid,
            out,
        } => {
            let violations = commands::cmd_verify(samples, sweep_seed, tolerance, grid, &out)?;
            if violations == 0 {
                println!("{samples} instances checked, no bound violations");
                Ok(0)
            } else {
                eprintln!("{violations} bound violations out of {samples} instances");
                Ok(4)
            }
        }
        Cmd::Table { out, rounds } => {
            if let Some(r) = rounds {
                cfg.n_rounds = r;
            }
            let rows = commands::cmd_table(&cfg, &out)?;
            println!("mu     mis      C_sim    C_ref    rate_sim    rate_ref");
            for r in &rows {
                println!(
                    "{:<6} {:<8.5} {:<8.5} {:<8.5} {:<11.1} {:<11.1}",
                    r.mu, r.misalignment, r.c_sim, r.c_ref, r.rate_sim_bps, r.rate_ref_bps
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
