use std::io;

use clap::Parser;
use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();
    let cli = taskbot_cli::Cli::parse();
    let status = taskbot_cli::run(cli, &mut io::stdout(), &mut io::stderr());
    std::process::exit(status as i32);
}
