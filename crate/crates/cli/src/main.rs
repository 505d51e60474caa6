use std::process::ExitCode;

use clap::Parser;
use jacobi_cli::{cmd_compute, cmd_generate, Cli, CliError, Command, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JACOBI_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args).map(|[f, g]| {
            println!("{}\n{}", f.display(), g.display());
        }),
        Command::Compute(args) => RunConfig::from_args(args)
            .and_then(|config| cmd_compute(&config))
            .and_then(|report| {
                let s = &report.stats;
                println!(
                    "critical edges {}  segments pl {} nonreduced {} reduced {}  removed {} ({:.1}%)",
                    s.critical_edges,
                    s.segments.pl,
                    s.segments.nonreduced,
                    s.segments.reduced,
                    s.measured_removed,
                    s.reduction_percent
                );
                println!("stats written to {}", report.stats_path.display());
                if s.validation.passed() {
                    Ok(())
                } else {
                    Err(CliError::Validation(format!("{:?}", s.validation)))
                }
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
