use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nc_sim::cli::{
    cmd_analytic, cmd_paf, cmd_simulate, parse_gains, workers_override, RawConfig,
};
use nc_sim::{Error, Result};

/// Link-level simulator for a two-source relay multicast cell where the
/// relay decodes and retransmits network-coded combinations.
#[derive(Parser)]
#[command(name = "nc-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form power allocation factors for a rate
    Paf {
        /// Bits per source symbol (2, 4 or 6)
        #[arg(long)]
        rate: u32,
        /// Channel magnitudes |g1|,|g2|,|h1|,|h2| for the instantaneous set
        #[arg(long)]
        gains: Option<String>,
    },
    /// Evaluate high-SNR error approximations over a config grid
    Analytic {
        /// Config file (flat key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override a config key, e.g. --set snr_db=20:40:5
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Estimate source frame error probabilities by Monte Carlo
    Simulate {
        /// Config file (flat key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Master seed (overrides the config file)
        #[arg(long)]
        seed: Option<u64>,
        /// Frames per grid point (overrides the config file)
        #[arg(long)]
        frames: Option<u64>,
        /// Worker threads; 0 lets the runtime decide
        #[arg(long)]
        workers: Option<usize>,
        /// Override a config key, e.g. --set kappa=0.3:0.8:0.05
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn load_config(path: &PathBuf, overrides: &[String]) -> Result<RawConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigValue {
        key: "config".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut raw = RawConfig::parse(&text)?;
    for spec in overrides {
        raw.apply_override(spec)?;
    }
    Ok(raw)
}

fn with_output(path: Option<PathBuf>, run: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            run(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            run(&mut lock)
        }
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Paf { rate, gains } => {
            let gains = gains.as_deref().map(parse_gains).transpose()?;
            let stdout = io::stdout();
            cmd_paf(rate, gains, &mut stdout.lock())
        }
        Command::Analytic {
            config,
            output,
            set,
        } => {
            let mut raw = load_config(&config, &set)?;
            with_output(output, |out| cmd_analytic(&mut raw, out))
        }
        Command::Simulate {
            config,
            output,
            seed,
            frames,
            workers,
            set,
        } => {
            let mut raw = load_config(&config, &set)?;
            if let Some(seed) = seed {
                raw.set_value("seed", seed.to_string());
            }
            if let Some(frames) = frames {
                raw.set_value("frames", frames.to_string());
            }
            let env = std::env::var("NC_SIM_WORKERS").ok();
            if let Some(workers) = workers_override(workers, env.as_deref())? {
                raw.set_value("workers", workers.to_string());
            }
            with_output(output, |out| cmd_simulate(&mut raw, out))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        // A downstream consumer like `head` closing the pipe early is
        // normal pipeline behavior, not an error worth reporting.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
