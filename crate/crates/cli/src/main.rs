use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slopeland::{run_scenario, ScenarioConfig};
use slopeland_cli::{
    apply_overrides, exit_code_for, parse_config, parse_pitch_list, read_file, run_sweep, write_run, CliError,
    EXIT_ERROR,
};

#[derive(Parser)]
#[command(name = "land", version, about = "Simulate automated landings on pitched pads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, e.g. `--set pad.pitch_deg=40`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Sensor noise seed, replacing `sensor.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the scenario once per pad pitch.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Pad pitches in degrees, comma separated.
        #[arg(long, default_value = "10,25,40,60")]
        pitches: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a config file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = apply_overrides(parse_config(&read_file(path)?)?, overrides)?;
    if let Some(seed) = seed {
        cfg.sensor.seed = seed;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            config,
            overrides,
            out,
            seed,
        } => {
            let cfg = load(&config, &overrides, seed)?;
            let (log, summary) = run_scenario(&cfg)?;
            write_run(&out, &log, &summary)?;
            log::info!("wrote {}", out.display());
            println!("{}", summary.outcome.label());
            Ok(exit_code_for([summary.outcome]))
        }
        Command::Sweep {
            config,
            pitches,
            overrides,
            out,
            seed,
        } => {
            let cfg = load(&config, &overrides, seed)?;
            let pitches = parse_pitch_list(&pitches)?;
            let report = run_sweep(&cfg, &pitches, Some(&out))?;
            print!("{}", report.to_csv());
            Ok(report.exit_code())
        }
        Command::Validate { config } => {
            parse_config(&read_file(&config)?)?;
            println!("{}: ok", config.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LAND_LOG_LEVEL", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
