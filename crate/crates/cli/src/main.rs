use clap::Parser;

use masdag_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = masdag_cli::run(cli) {
        eprintln!("masdag: {err}");
        std::process::exit(err.exit_code());
    }
}
