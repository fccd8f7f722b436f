use clap::Parser;

fn main() {
    let cli = dpw::cli::Cli::parse();
    std::process::exit(dpw::cli::main_with(cli));
}
