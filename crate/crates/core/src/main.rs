use clap::Parser;

use qg2::cli::{dispatch, Cli};
use qg2::error::exit;

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(exit::GENERIC),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
