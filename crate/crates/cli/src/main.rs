use clap::Parser;
use specreg_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("specreg: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
