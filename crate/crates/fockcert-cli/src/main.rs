//! `fockcert` — certify bosonic nonclassicality from Fock-state
//! probabilities, sweep state families, and export boundary or
//! phase-space data.
//!
//! Exit codes: 0 = success (certify: classical-compatible),
//! 1 = certify found the input nonclassical, 2 = usage or input error.

mod boundary;
mod certify;
mod criteria_id;
mod family;
mod opts;
mod output;
mod sweep;
mod wigner;

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    // The only environment variable the tool reads: worker thread count.
    if let Ok(text) = std::env::var("FOCKCERT_THREADS") {
        match text.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: FOCKCERT_THREADS must be a positive integer, got {text:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = opts::Cli::parse();
    match opts::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
