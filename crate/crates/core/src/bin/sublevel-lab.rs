use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sublevel_lab::runner::{self, ExperimentConfig, Subcommand};

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    Theorem,
    LemmaA,
    LemmaB,
    LemmaC,
    Counterexample,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Theorem => Subcommand::Theorem,
            Command::LemmaA => Subcommand::LemmaA,
            Command::LemmaB => Subcommand::LemmaB,
            Command::LemmaC => Subcommand::LemmaC,
            Command::Counterexample => Subcommand::Counterexample,
            Command::All => Subcommand::All,
        }
    }
}

/// Run verification experiments and write manifest.json, report.csv and
/// report.json. Exits 0 iff every check passes.
#[derive(Parser)]
#[command(name = "sublevel-lab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Command,
    /// JSON config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's output_dir, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = Subcommand::from(cli.subcommand);
    let result = ExperimentConfig::load(&cli.config).and_then(|cfg| {
        let out = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
        runner::run_with_threads(&cfg, cmd, Some(&out), cli.threads).map(|r| (r, out))
    });
    match result {
        Ok((report, out)) => {
            let s = &report.summary;
            println!("{cmd}: {}/{} checks passed, reports in {}", s.passed, s.checks, out.display());
            for name in &s.failing {
                println!("FAIL {name}");
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
