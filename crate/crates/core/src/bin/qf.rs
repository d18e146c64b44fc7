use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qf::cli::{self, CliError, ReportKind, RunConfig};

#[derive(Parser)]
#[command(name = "qf", version, about = "Query generators for entity search engines, evaluated on a seeded simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic bibliographic corpus.
    GenCorpus {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the dataset grid of a run config.
    GenDatasets {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the noisy engine index of a run config, with its provenance.
    BuildIndex {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every (dataset, generator) cell and write the results warehouse.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Warehouse directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Emit a CSV report computed from a warehouse.
    Report {
        /// Warehouse directory.
        warehouse: PathBuf,
        /// coverage-by-category, coverage-recall-ratio, efficiency-by-category,
        /// nextlink-scatter or nextlink-cutoffs.
        #[arg(long)]
        kind: String,
        /// Output file; `-` for stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

fn load(config: &PathBuf, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::load(config)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    Ok(c)
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::GenCorpus { size, seed, out } => {
            let corpus = cli::cmd_gen_corpus(size, seed, &out)?;
            eprintln!("wrote {} publications to {}", corpus.len(), out.display());
        }
        Command::GenDatasets { config, seed, out } => {
            let c = load(&config, seed)?;
            let datasets = cli::cmd_gen_datasets(&c, &out)?;
            eprintln!("wrote {} datasets to {}", datasets.len(), out.display());
        }
        Command::BuildIndex { config, seed, out } => {
            let c = load(&config, seed)?;
            let files = cli::cmd_build_index(&c, &out)?;
            eprintln!(
                "wrote {} index entities ({} distractors) to {}",
                files.entity_count,
                files.distractors,
                out.display()
            );
        }
        Command::Run { config, seed, out, jobs } => {
            let mut c = load(&config, seed)?;
            if let Some(out) = out {
                c.out = out;
            }
            if jobs == Some(0) {
                return Err(CliError::Usage("--jobs must be at least 1".into()).into());
            }
            c.jobs = jobs.or(c.jobs);
            let outcome = cli::cmd_run(&c).with_context(|| format!("run {}", config.display()))?;
            print!("{}", cli::summary_tables(&outcome.aggregates));
            println!(
                "{} cells, {} failed; warehouse {}",
                outcome.cells,
                outcome.failed,
                c.out.display()
            );
            for f in &outcome.failures {
                eprintln!("failed: {f}");
            }
            return Ok(outcome.exit_code());
        }
        Command::Report { warehouse, kind, out } => {
            let kind: ReportKind = kind.parse()?;
            cli::cmd_report(&warehouse, kind, &out)?;
        }
    }
    Ok(cli::EXIT_SUCCESS)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_USAGE } else { cli::EXIT_SUCCESS });
        }
    };
    match run(args.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<CliError>()
                .map_or(cli::EXIT_FAILURE, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
