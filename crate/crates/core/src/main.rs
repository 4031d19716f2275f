use clap::Parser;

use mgt_spectra::cli::{run, Cli, EXIT_VALIDATION};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    };
    std::process::exit(code);
}
