use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use loopbie_cli::{run_file, Command, THREADS_ENV};

/// Loop-subdivision boundary integral solver for electromagnetic scattering.
#[derive(Parser)]
#[command(version, after_help = format!("Threads default to ${THREADS_ENV} when the run file does not set them.\nExit codes: 0 success, 2 configuration or input error, 3 numerical failure."))]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Run file (TOML).
    config: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run_file(args.command, &args.config) {
        Ok(out) => {
            print!("{}", out.report);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
