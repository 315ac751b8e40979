use clap::Parser;

fn main() {
    std::process::exit(rnm_cli::main_with(rnm_cli::Cli::parse()));
}
