use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use irsbd::harness::{
    csv_string, emit_csv, emit_plot_data, load_config, parse_methods, parse_power_range, parse_se_mode, run_sweep,
    ScenarioConfig,
};
use irsbd::Error;

/// Monte Carlo spectral-efficiency sweep for BD precoders in an IRS-aided
/// two-user downlink.
#[derive(Debug, Parser)]
#[command(name = "irsbd", version)]
struct Cli {
    /// Scenario file (flat TOML key-value document)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated methods: PIB, FIB, NING_ADAPTED, NO_IRS_BD
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Transmit power sweep as start:step:stop in dBm
    #[arg(long)]
    power: Option<String>,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for columnar plot series
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// det or scalar
    #[arg(long)]
    se_mode: Option<String>,
    /// Worker threads; defaults to the available cores
    #[arg(long)]
    workers: Option<usize>,
}

fn resolve(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    let usage = |flag: &str, e: String| Error::Usage(format!("--{flag}: {e}"));
    if let Some(m) = &cli.methods {
        let names: Vec<&str> = m.split(',').filter(|s| !s.trim().is_empty()).collect();
        cfg.methods = parse_methods(&names).map_err(|e| usage("methods", e))?;
    }
    if let Some(n) = cli.realizations {
        cfg.realizations = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.power {
        cfg.power_sweep_dbm = parse_power_range(p).map_err(|e| usage("power", e))?;
    }
    if let Some(m) = &cli.se_mode {
        cfg.se_mode = parse_se_mode(m).map_err(|e| usage("se-mode", e))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = resolve(cli)?;
    let workers = match cli.workers {
        Some(0) => return Err(Error::Usage("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let result = run_sweep::<f64>(&cfg, workers)?;
    match &cli.out {
        Some(path) => emit_csv(&result, path)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv_string(&result).as_bytes())
                .map_err(|source| irsbd::harness::OutputError::Io { path: "<stdout>".into(), source })?;
        }
    }
    if let Some(dir) = &cli.plot_data {
        emit_plot_data(&result, dir)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irsbd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
