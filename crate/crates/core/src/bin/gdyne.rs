use clap::Parser;
use gdyne::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
