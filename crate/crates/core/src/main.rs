use clap::Parser;

use quasiammann::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = run(cli, &mut stdout) {
        eprintln!("error: {}", e);
        std::process::exit(exit_code(&e));
    }
}
