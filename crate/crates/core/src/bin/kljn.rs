use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kljn::circuit::BitState;
use kljn::experiment::{cmd_levels, cmd_session, cmd_spectra, cmd_sweep, sweep_table, sweep_to_csv};
use kljn::{Error, Mode, SystemConfig};

#[derive(Parser)]
#[command(name = "kljn", version, about = "KLJN key exchange bit-error simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write machine-readable output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// voltage, current or combined.
    #[arg(long)]
    mode: Option<String>,
    /// Force the actual bit state: 00, 11 or 0110.
    #[arg(long = "force-state")]
    force_state: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and empirical mean-square levels for every bit state.
    Levels(Common),
    /// Analytic vs Monte Carlo dangerous-error rates over a list of gammas.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending gammas.
        #[arg(long)]
        gammas: String,
    },
    /// One full session; JSON report with extracted keys.
    Session(Common),
    /// Spectrum of the squared channel current against theory.
    Spectra(Common),
}

fn resolve(common: &Common) -> Result<SystemConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => SystemConfig::load(p)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(m) = &common.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(s) = &common.force_state {
        cfg.force_state = Some(s.parse::<BitState>()?);
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Config(format!("`{name}` {reason}")),
        other => other,
    })?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_gammas(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Usage(format!("bad gamma `{t}`"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Levels(c) => {
            let cfg = resolve(&c)?;
            let report = cmd_levels(&cfg)?;
            println!("{report}");
            if c.out.is_some() {
                emit(&c.out, &report.to_csv())?;
            }
        }
        Command::Sweep { common, gammas } => {
            let cfg = resolve(&common)?;
            let rows = cmd_sweep(&cfg, &parse_gammas(&gammas)?, cfg.mode, cfg.force_state)?;
            match &common.out {
                Some(_) => {
                    print!("{}", sweep_table(&rows));
                    emit(&common.out, &sweep_to_csv(&rows))?;
                }
                None => print!("{}", sweep_to_csv(&rows)),
            }
        }
        Command::Session(c) => {
            let cfg = resolve(&c)?;
            emit(&c.out, &cmd_session(&cfg)?.to_json())?;
        }
        Command::Spectra(c) => {
            let cfg = resolve(&c)?;
            emit(&c.out, &cmd_spectra(&cfg)?.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
