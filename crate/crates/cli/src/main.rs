use clap::Parser;
use framelab_cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
