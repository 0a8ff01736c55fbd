use std::io;
use std::process::ExitCode;

use clap::Parser;
use quatsig_cli::{cmd_beamform, cmd_gradcheck, cmd_predict, Cli, Command, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let result = match &cli.command {
        Command::Gradcheck(a) => cmd_gradcheck(a, &mut stdout),
        Command::Predict(a) => cmd_predict(a, &mut stdout),
        Command::Beamform(a) => cmd_beamform(a, &mut stdout),
    };
    match result {
        Ok(report) => {
            eprintln!("elapsed: {:.3} s", report.elapsed.as_secs_f64());
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
