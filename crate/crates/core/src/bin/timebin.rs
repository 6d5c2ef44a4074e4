use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use timebin::experiment::{load_config, run_experiment};

/// Run a time-bin collision-model experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "timebin", version)]
struct Args {
    /// Flat `key = value` experiment description.
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path; overrides `out_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load_config(&args.config).and_then(|mut cfg| {
        if let Some(out) = args.out {
            cfg.out_path = out;
        }
        run_experiment(&cfg)
    });
    match result {
        Ok(report) => {
            println!("{}", report.summary);
            if !report.passed {
                eprintln!("tolerance exceeded; results written to {}", report.out_path.display());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
