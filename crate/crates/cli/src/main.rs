use clap::Parser;
use tracenet_cli::{pipeline, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = pipeline::run(&cli.command) {
        eprintln!("tracenet: {e}");
        std::process::exit(e.exit_code());
    }
}
