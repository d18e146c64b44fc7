//! The command layer: generate a corpus, run a small grid from a config
//! file, and emit reports from the warehouse.

use std::fs;

use qf::cli::{self, render_report, ReportKind, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("qf-pipeline-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    cli::cmd_gen_corpus(3000, 42, &dir.join("corpus.jsonl"))?;

    let catalog = concat!(env!("CARGO_MANIFEST_DIR"), "/../../catalog");
    let config = format!(
        r#"
format = "qf-run-1"
seed = 42
corpus = "corpus.jsonl"
caps = "{catalog}/caps/scholar.toml"
genspecs = ["{catalog}/genspecs"]
out = "warehouse"
[grid]
sizes = [5, 30]
reps = 2
"#
    );
    fs::write(dir.join("run.toml"), config)?;

    let run = RunConfig::load(dir.join("run.toml"))?;
    let outcome = cli::cmd_run(&run)?;
    print!("{}", cli::summary_tables(&outcome.aggregates));
    println!("{} cells, {} failed, inputs {}", outcome.cells, outcome.failed, &outcome.input_hash[..12]);

    print!("{}", render_report(&run.out, ReportKind::CoverageByCategory)?);
    fs::remove_dir_all(&dir)?;
    Ok(())
}
