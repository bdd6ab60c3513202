use clap::Parser;
use hetnet_cli::{main_with, Args};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HETNET_LOG", "warn")).init();
    let args = Args::parse();
    std::process::exit(main_with(&args));
}
