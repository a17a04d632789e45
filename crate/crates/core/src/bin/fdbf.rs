use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fdbf_core::harness::config::{base_config, load_config, parse_config, to_toml, RECIPES};
use fdbf_core::harness::emit::{to_csv, to_json};
use fdbf_core::harness::{emit_results, run_sweep, Format, Preset};
use fdbf_core::{Error, ErrorCategory};

/// Full-duplex wideband beamforming simulator.
#[derive(Parser)]
#[command(name = "fdbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep.
    Run {
        /// Flat TOML scenario file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Band preset, variant or figure recipe supplying defaults.
        #[arg(long)]
        preset: Option<String>,
        /// Master seed; beats FDBF_SEED and the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        /// Keep per-trial records in JSON output.
        #[arg(long)]
        full: bool,
    },
    /// List figure recipes and presets.
    Recipes,
}

fn seed_from_env() -> Result<Option<u64>, Error> {
    match std::env::var("FDBF_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config { key: "FDBF_SEED".into(), detail: format!("`{v}` is not an unsigned integer") }),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Recipes => {
            for r in RECIPES {
                println!("{:<8} {:<9} {}", r.name, r.preset, r.description);
            }
            for p in Preset::ALL {
                let c = base_config(p.name())?;
                println!(
                    "{:<8} preset    {} BS {}+{}, UE {}, K {}, ADC {} mW",
                    p, c.carrier_label, c.n_bs_tx, c.n_bs_rx, c.n_ue_antennas, c.n_subcarriers, c.p_adc_mw
                );
            }
            Ok(())
        }
        Command::Run { config, preset, seed, trials, out, format, full } => {
            let mut cfg = match &config {
                Some(path) => load_config(path, preset.as_deref())?,
                None => parse_config("", preset.as_deref())?,
            };
            if let Some(s) = seed_from_env()? {
                cfg.seed = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.validate()?;
            let res = run_sweep(&cfg)?;
            let format = match format {
                OutFormat::Csv => Format::Csv,
                OutFormat::Json => Format::Json,
            };
            match out {
                Some(path) => emit_results(&res, format, full, &path),
                None => {
                    match format {
                        Format::Csv => print!("{}", to_csv(&res)?),
                        Format::Json => println!("{}", to_json(&res, full)?),
                    }
                    eprint!("{}", to_toml(&res.config)?.lines().map(|l| format!("# {l}\n")).collect::<String>());
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat: ErrorCategory = e.category();
            eprintln!("error[{}]: {e}", cat.as_str());
            ExitCode::from(cat as u8)
        }
    }
}
