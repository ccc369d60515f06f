use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use cmpgeom::config::ExperimentConfig;
use cmpgeom::experiments;

/// Seeded batch runner for the model-space experiments.
#[derive(Parser, Debug)]
#[command(name = "cmpgeom", version)]
struct Cli {
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report and tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured experiment.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    quiet: bool,
    /// Lists the experiments and exits.
    #[arg(long)]
    list: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(e) = &cli.experiment {
        cfg.experiment = e.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.list {
        print!("{}", experiments::list_experiments());
        return ExitCode::SUCCESS;
    }
    let resolved = match load(&cli).and_then(|c| Ok(c.resolve()?)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let report = match experiments::run(&resolved) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let name = resolved.name().to_string();
    let mut written = report.clone();
    if !resolved.config.tables {
        written.tables.clear();
    }
    let paths = match written.write(&resolved.config.out_dir, &name) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(2);
        }
    };
    if !cli.quiet {
        println!("{}", report.scalar_json());
        for a in &report.assertions {
            println!("{} {} ({})", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
        }
        for p in paths {
            println!("wrote {}", p.display());
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        for a in report.failures() {
            eprintln!("assertion failed: {}", a.name);
        }
        ExitCode::from(1)
    }
}
