use std::process::ExitCode;

use qpec::cli::{run_from_args, CliError};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().skip(1).any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V") || args.len() == 1 {
        // let clap render help/version and pick the exit code
        use clap::Parser;
        qpec::cli::Cli::parse_from(&args);
    }
    match run_from_args(&args) {
        Ok(output) => {
            let written = match &output.out {
                Some(path) => std::fs::write(path, &output.csv).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", output.csv);
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => report(&CliError::Validation(msg)),
            }
        }
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
