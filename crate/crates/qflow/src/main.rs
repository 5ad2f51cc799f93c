use clap::Parser;

fn main() {
    std::process::exit(qflow::cli::main_with(qflow::cli::Cli::parse()));
}
