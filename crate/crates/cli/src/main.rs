#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;
mod plot;
mod run;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("qbath: cannot start {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run::run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qbath: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
