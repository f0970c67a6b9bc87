use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use renormforge::{emit, run, Command, ExperimentConfig};

/// Renormalization workbench for pairs of analytic maps.
#[derive(Debug, Parser)]
#[command(name = "renormforge", version)]
struct Cli {
    /// renorm1d, renorm2d, spectrum, contract-sweep, commutator-sweep,
    /// brjuno, microscope or selftest.
    command: String,
    /// TOML file with dotted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set run.n=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of json,csv (overrides output.formats).
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut sets = cli.sets.clone();
    if let Some(dir) = &cli.out {
        sets.push(format!("output.dir={:?}", dir.display().to_string()));
    }
    if let Some(f) = &cli.format {
        let items: Vec<String> = f.iter().map(|s| format!("{:?}", s.trim())).collect();
        sets.push(format!("output.formats=[{}]", items.join(",")));
    }
    let cfg = match ExperimentConfig::load(cli.config.as_deref(), &sets) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let report = run(command, &cfg);
    for c in &report.checks {
        println!("{}", c.line());
    }
    match emit(&report, &cfg.output.formats, &PathBuf::from(&cfg.output.dir)) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error writing reports: {e}");
            return ExitCode::from(1);
        }
    }
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) }
}
