use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use harvest_cli::{execute, exit_code, resolve_scenario, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let scenario = resolve_scenario(cli)?;
    #[cfg(feature = "parallel")]
    if let Some(n) = scenario.output.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let artifact = execute(&cli.command, &scenario)?;
    match &scenario.output.path {
        Some(path) => std::fs::write(path, &artifact.body)?,
        None => std::io::stdout().lock().write_all(artifact.body.as_bytes())?,
    }
    for note in &artifact.notes {
        eprintln!("{note}");
    }
    Ok(if artifact.unconverged { 2 } else { 0 })
}
