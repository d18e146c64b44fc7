//! Command implementations behind the `qf` binary.
//!
//! Each `cmd_*` function does the work of one subcommand and returns a
//! value the binary turns into output and an exit code.

mod config;
mod report;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{Grid, RunConfig, RUN_FORMAT};
pub use report::{render_report, ReportKind};

use crate::corpus::{self, build_index, generate_datasets, load_datasets, synth, Corpus, CorpusError, Dataset};
use crate::engine::{CapsError, EngineCapabilities};
use crate::evaluator::warehouse::{input_hash, write_warehouse, Manifest, WarehouseError, WarehouseFiles};
use crate::evaluator::{run_experiment, AggregateRow, ExperimentContext};
use crate::generators::{GeneratorSpec, PlanError};

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config field {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Caps(#[from] CapsError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Warehouse(#[from] WarehouseError),
    #[error("all {0} cells failed")]
    AllCellsFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(io_err(p)),
        _ => Ok(()),
    }
}

/// Writes a synthetic corpus of `size` publications.
pub fn cmd_gen_corpus(size: usize, seed: u64, out: &Path) -> Result<Corpus, CliError> {
    if size == 0 {
        return Err(CliError::Usage("corpus size must be at least 1".into()));
    }
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(size), seed);
    create_parent(out)?;
    corpus::save_corpus(&corpus, out)?;
    Ok(corpus)
}

fn datasets_for(config: &RunConfig, corpus: &Corpus) -> Result<Vec<Dataset>, CliError> {
    match &config.datasets {
        Some(path) => {
            let datasets = load_datasets(path)?;
            for d in &datasets {
                d.validate(corpus)?;
            }
            Ok(datasets)
        }
        None => Ok(generate_datasets(
            corpus,
            &config.grid.sizes,
            &config.grid.categories,
            config.grid.reps,
            config.dataset_seed(),
        )?),
    }
}

/// Writes the dataset grid of `config` to `out`.
pub fn cmd_gen_datasets(config: &RunConfig, out: &Path) -> Result<Vec<Dataset>, CliError> {
    let corpus = corpus::load_corpus(&config.corpus)?;
    let datasets = generate_datasets(
        &corpus,
        &config.grid.sizes,
        &config.grid.categories,
        config.grid.reps,
        config.dataset_seed(),
    )?;
    create_parent(out)?;
    corpus::save_datasets(&datasets, out)?;
    Ok(datasets)
}

/// Files written by [`cmd_build_index`].
#[derive(Debug, Clone)]
pub struct IndexFiles {
    /// The index entities in corpus format, in index order.
    pub entities: PathBuf,
    /// `entity_id,source_id,static_rank`; `source_id` is empty for distractors.
    pub provenance: PathBuf,
    pub entity_count: usize,
    pub distractors: usize,
}

/// Builds the noisy index of `config` and writes it to the directory `out`.
pub fn cmd_build_index(config: &RunConfig, out: &Path) -> Result<IndexFiles, CliError> {
    let corpus = corpus::load_corpus(&config.corpus)?;
    let (index, provenance) = build_index(&corpus, &config.noise_profile())?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let entities = out.join("index.jsonl");
    let file = fs::File::create(&entities).map_err(io_err(&entities))?;
    corpus::write_corpus(BufWriter::new(file), index.publications()).map_err(io_err(&entities))?;

    let prov_path = out.join("provenance.csv");
    let mut w = csv::Writer::from_path(&prov_path).map_err(|e| CliError::Io {
        path: prov_path.display().to_string(),
        source: e.into(),
    })?;
    let csv_io = |e: csv::Error| CliError::Io {
        path: prov_path.display().to_string(),
        source: e.into(),
    };
    w.write_record(["entity_id", "source_id", "static_rank"]).map_err(csv_io)?;
    for (pos, p) in index.publications().enumerate() {
        let source = provenance.source_of(&p.id).unwrap_or_default();
        let rank = index.static_rank(pos as u32).to_string();
        w.write_record([p.id.as_str(), source, rank.as_str()]).map_err(csv_io)?;
    }
    w.flush().map_err(io_err(&prov_path))?;
    Ok(IndexFiles {
        entities,
        provenance: prov_path,
        entity_count: index.len(),
        distractors: provenance.distractor_count(),
    })
}

/// What [`cmd_run`] produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: WarehouseFiles,
    pub input_hash: String,
    pub cells: usize,
    pub failed: usize,
    /// First few failure messages, as `run_id: error`.
    pub failures: Vec<String>,
    pub aggregates: Vec<AggregateRow>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.failed == 0 {
            EXIT_SUCCESS
        } else {
            EXIT_PARTIAL
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(io_err(path))
}

/// Runs the full pipeline of `config` and writes the warehouse to `config.out`.
///
/// Fails with [`CliError::AllCellsFailed`] when no cell succeeded; partial
/// failures are reported in the outcome.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let corpus_bytes = read_bytes(&config.corpus)?;
    let corpus = corpus::parse_corpus(corpus_bytes.as_slice())?;
    let caps_bytes = read_bytes(&config.caps)?;
    let caps = EngineCapabilities::from_toml_str(&String::from_utf8_lossy(&caps_bytes))?;
    let mut spec_bytes = Vec::with_capacity(config.genspecs.len());
    let mut specs = Vec::with_capacity(config.genspecs.len());
    for path in &config.genspecs {
        let bytes = read_bytes(path)?;
        specs.push(GeneratorSpec::from_toml_str(&String::from_utf8_lossy(&bytes))?);
        spec_bytes.push(bytes);
    }
    let datasets = datasets_for(config, &corpus)?;
    let datasets_bytes = config.datasets.as_deref().map(read_bytes).transpose()?;

    let noise = config.noise_profile();
    let (index, provenance) = build_index(&corpus, &noise)?;
    let ctx = ExperimentContext::new(&corpus, &index, &provenance, &caps)
        .with_policy(config.policy)
        .with_match_config(config.matching);
    let experiment = run_experiment(&ctx, &datasets, &specs, config.jobs);

    // Everything that can change a result, and nothing that cannot.
    let settings = format!(
        "seed={}\npolicy={}\ngrid={:?}\nnoise={:?}\nmatch={:?}\n",
        config.seed, config.policy, config.grid, noise, config.matching
    );
    let mut parts: Vec<(&str, &[u8])> = vec![
        ("settings", settings.as_bytes()),
        ("corpus", &corpus_bytes),
        ("caps", &caps_bytes),
    ];
    parts.extend(spec_bytes.iter().map(|b| ("genspec", b.as_slice())));
    if let Some(b) = &datasets_bytes {
        parts.push(("datasets", b));
    }
    let hash = input_hash(parts);

    let generators: Vec<&str> = specs.iter().map(|s| s.id.as_str()).collect();
    let manifest = Manifest::new(&hash)
        .with("run_format", RUN_FORMAT)
        .with("corpus_format", corpus::CORPUS_FORMAT)
        .with("master_seed", config.seed)
        .with("dataset_seed", config.dataset_seed())
        .with("index_seed", noise.seed)
        .with("engine", &caps.id)
        .with("policy", config.policy)
        .with("corpus_size", corpus.len())
        .with("index_size", index.len())
        .with("datasets", datasets.len())
        .with("generators", generators.join(" "))
        .with(
            "note_ranking",
            "partial matches ranked by satisfied fraction then static rank; a modeling choice",
        )
        .with(
            "note_matching",
            "title similarity is trigram Dice; a stand-in for an unspecified matcher",
        );
    let files = write_warehouse(&config.out, &experiment, &manifest)?;

    let failed = experiment.failures();
    if failed == experiment.cells.len() && failed > 0 {
        return Err(CliError::AllCellsFailed(failed));
    }
    let failures = experiment
        .cells
        .iter()
        .filter_map(|c| c.record.error.as_ref().map(|e| format!("{}: {e}", c.record.run_id)))
        .take(10)
        .collect();
    Ok(RunOutcome {
        files,
        input_hash: hash,
        cells: experiment.cells.len(),
        failed,
        failures,
        aggregates: experiment.aggregates(),
    })
}

/// Writes report `kind` of the warehouse in `dir` to `out` (`-` for stdout).
pub fn cmd_report(dir: &Path, kind: ReportKind, out: &Path) -> Result<(), CliError> {
    emit(&render_report(dir, kind)?, out)
}

/// Generator x category text tables of mean coverage, recall and efficiency.
pub fn summary_tables(rows: &[AggregateRow]) -> String {
    let mut generators: Vec<&str> = Vec::new();
    let mut categories: Vec<&str> = Vec::new();
    for r in rows {
        if !generators.contains(&r.generator_id.as_str()) {
            generators.push(&r.generator_id);
        }
        if !categories.contains(&r.category.as_str()) {
            categories.push(&r.category);
        }
    }
    generators.sort_by_key(|g| crate::evaluator::generator_order(g));
    let find = |g: &str, c: &str| rows.iter().find(|r| r.generator_id == g && r.category == c);

    type Measure = (&'static str, fn(&AggregateRow) -> Option<f64>);
    let measures: [Measure; 4] = [
        ("coverage", |r| Some(r.coverage)),
        ("recall", |r| r.recall),
        ("efficiency (all requests)", |r| Some(r.efficiency_all)),
        ("efficiency (first requests)", |r| Some(r.efficiency_first)),
    ];
    let mut out = String::new();
    for (title, get) in measures {
        let _ = writeln!(out, "mean {title}");
        let _ = write!(out, "{:>9}", "generator");
        for c in &categories {
            let _ = write!(out, " {c:>8}");
        }
        out.push('\n');
        for g in &generators {
            let _ = write!(out, "{g:>9}");
            for c in &categories {
                match find(g, c).and_then(get) {
                    Some(v) => {
                        let _ = write!(out, " {v:>8.3}");
                    }
                    None => {
                        let _ = write!(out, " {:>8}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Writes `text` to `out`, or to stdout for `-`.
pub fn emit(text: &str, out: &Path) -> Result<(), CliError> {
    if out == Path::new("-") {
        let mut stdout = io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(io_err(out));
    }
    create_parent(out)?;
    fs::write(out, text).map_err(io_err(out))
}
