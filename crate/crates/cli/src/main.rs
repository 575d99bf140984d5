use std::process::ExitCode;

use altcanvas_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("altcanvas: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
