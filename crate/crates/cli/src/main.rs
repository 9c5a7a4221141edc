use std::process::ExitCode;

use clap::Parser;
use mobility_loci_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (stage, args) = Cli::parse().command.split();
    let outcome = RunConfig::resolve(args).and_then(|cfg| run(stage, &cfg));
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
