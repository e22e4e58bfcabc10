use clap::Parser;
use leaderscope_cli::cli::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = leaderscope_cli::init_threads().and_then(|_| leaderscope_cli::run(&cli)) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
