use clap::Parser;

fn main() {
    if let Err(e) = radoncs::cli::run(radoncs::cli::Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
