use std::path::PathBuf;
use std::process::ExitCode;

use biot_st::cli::{self, RunConfig, Study};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biot-st", version, about = "Space-time FE solver for dynamic poroelasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study.
    Convergence(Flags),
    /// L-shaped benchmark with goal quantities.
    Benchmark(Flags),
    /// Study chosen by the `study` key of the config (default: convergence).
    Run(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dG or cG.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// Comma-separated refinement levels.
    #[arg(long)]
    levels: Option<String>,
    /// gmres or direct.
    #[arg(long)]
    solver: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        for (key, value) in [
            ("scheme", &self.scheme),
            ("k", &self.k),
            ("r", &self.r),
            ("levels", &self.levels),
            ("solver", &self.solver),
        ] {
            if let Some(value) = value {
                v.push((key.to_string(), value.clone()));
            }
        }
        if let Some(out) = &self.out {
            v.push(("out".to_string(), out.display().to_string()));
        }
        v
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let (study, flags) = match &cli.command {
        Command::Convergence(f) => (Some(Study::Convergence), f),
        Command::Benchmark(f) => (Some(Study::Benchmark), f),
        Command::Run(f) => (None, f),
    };
    let overrides = flags.overrides();
    let cfg = match &flags.config {
        Some(path) => RunConfig::from_file(study, path, &overrides),
        None => RunConfig::from_pairs(study, &overrides),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_CONFIG as u8);
        }
    };
    println!("# {}", cfg.echo());
    match cli::run(&cfg, |msg| eprintln!("{msg}")) {
        Ok((outcome, written)) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::from(cli::EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
