//! The results warehouse: one directory per experiment.
//!
//! - `manifest`: `key=value` lines; the input hash, seeds, format versions.
//! - `runs.jsonl`: one line per cell with its trace, measures and mapping.
//! - `measures.csv`: one row per successful cell.
//! - `pages.csv`: one row per fetched page with its precision.
//! - `aggregates.csv`: mean measures per category and generator.
//!
//! Every file starts with a `qf-wh-1` version marker. Writing into a
//! directory whose manifest carries a different input hash is refused, so
//! results of different inputs never mix; the same hash regenerates the same
//! files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{aggregate, AggregateRow, CellResult, Experiment, MeasureReport, PagePrecisionSample, RunRecord};
use crate::corpus::Category;
use crate::matcher::MatchMapping;

pub const WAREHOUSE_FORMAT: &str = "qf-wh-1";

pub const MEASURE_COLUMNS: [&str; 12] = [
    "dataset_id",
    "category",
    "size",
    "generator_id",
    "coverage",
    "recall",
    "precision",
    "efficiency_all",
    "efficiency_first",
    "total_requests",
    "queries",
    "seed",
];

/// Written into `recall` cells when no relevant entity exists.
pub const UNDEFINED: &str = "NA";

#[derive(Debug, Error)]
pub enum WarehouseError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("warehouse {path} holds results for inputs {existing}, not {new}")]
    Conflict {
        path: String,
        existing: String,
        new: String,
    },
    #[error("warehouse {0} has no results")]
    Empty(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WarehouseError + '_ {
    move |source| WarehouseError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> WarehouseError {
    WarehouseError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// SHA-256 over labelled input blobs, as lowercase hex.
pub fn input_hash<'a>(parts: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    for (label, bytes) in parts {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Run-level metadata.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub input_hash: String,
    /// Additional `key=value` entries, written sorted.
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(input_hash: impl Into<String>) -> Self {
        Manifest {
            input_hash: input_hash.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    fn render(&self) -> String {
        let mut out = format!("format={WAREHOUSE_FORMAT}\ninput_hash={}\n", self.input_hash);
        for (k, v) in &self.entries {
            out.push_str(&format!("{k}={}\n", v.replace('\n', " ")));
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WarehouseError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut lines = text.lines();
        if lines.next() != Some(&format!("format={WAREHOUSE_FORMAT}")) {
            return Err(format_err(path, format!("missing format={WAREHOUSE_FORMAT} header")));
        }
        let mut manifest = Manifest::default();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format_err(path, format!("not a key=value line: {line:?}")))?;
            if k == "input_hash" {
                manifest.input_hash = v.to_string();
            } else {
                manifest.entries.insert(k.to_string(), v.to_string());
            }
        }
        Ok(manifest)
    }
}

/// One row of `measures.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub dataset_id: String,
    pub category: Category,
    pub size: usize,
    pub generator_id: String,
    pub coverage: f64,
    pub recall: Option<f64>,
    pub precision: f64,
    pub efficiency_all: f64,
    pub efficiency_first: f64,
    pub total_requests: u64,
    pub queries: u64,
    pub seed: u64,
}

fn decimal(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Serialize)]
struct RunLineOut<'a> {
    record: &'a RunRecord,
    measures: &'a Option<MeasureReport>,
    mapping: &'a MatchMapping,
}

#[derive(Deserialize)]
struct RunLineIn {
    record: RunRecord,
    measures: Option<MeasureReport>,
    mapping: MatchMapping,
}

fn create(path: &Path) -> Result<BufWriter<File>, WarehouseError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, WarehouseError> {
    let mut out = create(path)?;
    writeln!(out, "# format={WAREHOUSE_FORMAT}").map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(out))
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> WarehouseError + '_ {
    move |e| format_err(path, e.to_string())
}

/// Paths of the files written.
#[derive(Debug, Clone)]
pub struct WarehouseFiles {
    pub manifest: PathBuf,
    pub runs: PathBuf,
    pub measures: PathBuf,
    pub pages: PathBuf,
    pub aggregates: PathBuf,
}

impl WarehouseFiles {
    pub fn in_dir(dir: &Path) -> Self {
        WarehouseFiles {
            manifest: dir.join("manifest"),
            runs: dir.join("runs.jsonl"),
            measures: dir.join("measures.csv"),
            pages: dir.join("pages.csv"),
            aggregates: dir.join("aggregates.csv"),
        }
    }
}

pub fn write_warehouse(
    dir: impl AsRef<Path>,
    experiment: &Experiment,
    manifest: &Manifest,
) -> Result<WarehouseFiles, WarehouseError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = WarehouseFiles::in_dir(dir);
    if files.manifest.exists() {
        let existing = Manifest::load(&files.manifest)?;
        if existing.input_hash != manifest.input_hash {
            return Err(WarehouseError::Conflict {
                path: dir.display().to_string(),
                existing: existing.input_hash,
                new: manifest.input_hash.clone(),
            });
        }
    }

    let mut runs = create(&files.runs)?;
    writeln!(runs, "{{\"format\":\"{WAREHOUSE_FORMAT}\"}}").map_err(io_err(&files.runs))?;
    for cell in &experiment.cells {
        let line = RunLineOut {
            record: &cell.record,
            measures: &cell.measures,
            mapping: &cell.mapping,
        };
        let json = serde_json::to_string(&line).map_err(|e| format_err(&files.runs, e.to_string()))?;
        writeln!(runs, "{json}").map_err(io_err(&files.runs))?;
    }
    runs.flush().map_err(io_err(&files.runs))?;

    write_measures(&files.measures, &experiment.cells)?;

    let mut pages = csv_writer(&files.pages)?;
    pages
        .write_record(["run_id", "query_id", "page", "page_precision", "next_offered", "next_page_precision"])
        .map_err(csv_err(&files.pages))?;
    for s in experiment.samples() {
        pages
            .write_record([
                s.run_id.clone(),
                s.query_id.clone(),
                s.page.to_string(),
                decimal(s.page_precision),
                s.next_offered.to_string(),
                s.next_page_precision.map(decimal).unwrap_or_default(),
            ])
            .map_err(csv_err(&files.pages))?;
    }
    pages.flush().map_err(io_err(&files.pages))?;

    write_aggregates(&files.aggregates, &experiment.aggregates())?;

    let full = manifest
        .clone()
        .with("cells", experiment.cells.len())
        .with("failed_cells", experiment.failures())
        .with("files", "runs.jsonl measures.csv pages.csv aggregates.csv");
    fs::write(&files.manifest, full.render()).map_err(io_err(&files.manifest))?;
    Ok(files)
}

fn write_measures(path: &Path, cells: &[CellResult]) -> Result<(), WarehouseError> {
    let mut w = csv_writer(path)?;
    w.write_record(MEASURE_COLUMNS).map_err(csv_err(path))?;
    for cell in cells {
        let Some(m) = &cell.measures else { continue };
        let r = &cell.record;
        w.write_record([
            r.dataset_id.clone(),
            r.category.as_str().to_string(),
            r.size.to_string(),
            r.generator_id.clone(),
            decimal(m.coverage.value()),
            m.recall.map_or_else(|| UNDEFINED.to_string(), |x| decimal(x.value())),
            decimal(m.precision.value()),
            decimal(m.efficiency_all.value()),
            decimal(m.efficiency_first.value()),
            m.total_requests.to_string(),
            m.queries.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_aggregates(path: &Path, rows: &[AggregateRow]) -> Result<(), WarehouseError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "category",
        "generator_id",
        "cells",
        "coverage",
        "recall",
        "precision",
        "efficiency_all",
        "efficiency_first",
    ])
    .map_err(csv_err(path))?;
    for a in rows {
        w.write_record([
            a.category.clone(),
            a.generator_id.clone(),
            a.cells.to_string(),
            decimal(a.coverage),
            a.recall.map_or_else(|| UNDEFINED.to_string(), decimal),
            decimal(a.precision),
            decimal(a.efficiency_all),
            decimal(a.efficiency_first),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Opens a versioned CSV, checking the marker line.
fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>, WarehouseError> {
    let mut reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(io_err(path))?;
    if first.trim_end() != format!("# format={WAREHOUSE_FORMAT}") {
        return Err(format_err(path, format!("missing # format={WAREHOUSE_FORMAT} header")));
    }
    Ok(csv::Reader::from_reader(reader))
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, i: usize, name: &str) -> Result<T, WarehouseError> {
    row.get(i)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format_err(path, format!("bad {name} in row {:?}", row.position().map(|p| p.line()))))
}

pub fn read_measures(dir: impl AsRef<Path>) -> Result<Vec<MeasureRow>, WarehouseError> {
    let path = WarehouseFiles::in_dir(dir.as_ref()).measures;
    let mut reader = csv_reader(&path)?;
    let header = reader.headers().map_err(csv_err(&path))?.clone();
    if header.iter().ne(MEASURE_COLUMNS) {
        return Err(format_err(&path, "unexpected columns"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err(&path))?;
        let category: String = field(&path, &rec, 1, "category")?;
        rows.push(MeasureRow {
            dataset_id: field(&path, &rec, 0, "dataset_id")?,
            category: category.parse().map_err(|e: String| format_err(&path, e))?,
            size: field(&path, &rec, 2, "size")?,
            generator_id: field(&path, &rec, 3, "generator_id")?,
            coverage: field(&path, &rec, 4, "coverage")?,
            recall: match rec.get(5) {
                Some(UNDEFINED) => None,
                _ => Some(field(&path, &rec, 5, "recall")?),
            },
            precision: field(&path, &rec, 6, "precision")?,
            efficiency_all: field(&path, &rec, 7, "efficiency_all")?,
            efficiency_first: field(&path, &rec, 8, "efficiency_first")?,
            total_requests: field(&path, &rec, 9, "total_requests")?,
            queries: field(&path, &rec, 10, "queries")?,
            seed: field(&path, &rec, 11, "seed")?,
        });
    }
    Ok(rows)
}

pub fn read_pages(dir: impl AsRef<Path>) -> Result<Vec<PagePrecisionSample>, WarehouseError> {
    let path = WarehouseFiles::in_dir(dir.as_ref()).pages;
    let mut reader = csv_reader(&path)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err(&path))?;
        out.push(PagePrecisionSample {
            run_id: field(&path, &rec, 0, "run_id")?,
            query_id: field(&path, &rec, 1, "query_id")?,
            page: field(&path, &rec, 2, "page")?,
            page_precision: field(&path, &rec, 3, "page_precision")?,
            next_offered: field(&path, &rec, 4, "next_offered")?,
            next_page_precision: match rec.get(5) {
                Some("") | None => None,
                _ => Some(field(&path, &rec, 5, "next_page_precision")?),
            },
        });
    }
    Ok(out)
}

/// Cells stored in `runs.jsonl`.
pub fn read_runs(dir: impl AsRef<Path>) -> Result<Vec<CellResult>, WarehouseError> {
    let path = WarehouseFiles::in_dir(dir.as_ref()).runs;
    let reader = BufReader::new(File::open(&path).map_err(io_err(&path))?);
    let mut lines = reader.lines();
    let header = lines.next().transpose().map_err(io_err(&path))?;
    if header.as_deref() != Some(&format!("{{\"format\":\"{WAREHOUSE_FORMAT}\"}}")) {
        return Err(format_err(&path, "missing format header"));
    }
    let mut cells = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(io_err(&path))?;
        let parsed: RunLineIn = serde_json::from_str(&line)
            .map_err(|e| format_err(&path, format!("line {}: {e}", n + 2)))?;
        cells.push(CellResult {
            record: parsed.record,
            measures: parsed.measures,
            mapping: parsed.mapping,
            pages: Vec::new(),
        });
    }
    Ok(cells)
}

/// Aggregates recomputed from `measures.csv`, which holds rounded values.
pub fn aggregates_from_rows(rows: &[MeasureRow]) -> Vec<AggregateRow> {
    let reports: Vec<(String, String, MeasureReport)> = rows
        .iter()
        .map(|r| {
            (
                r.category.as_str().to_string(),
                r.generator_id.clone(),
                approx_report(r),
            )
        })
        .collect();
    aggregate(reports.iter().map(|(c, g, m)| (c.as_str(), g.as_str(), m)))
}

/// A report whose fractions reproduce the stored decimals.
fn approx_report(r: &MeasureRow) -> MeasureReport {
    use super::Fraction;
    const SCALE: u64 = 1_000_000;
    let f = |x: f64| Fraction::or_zero((x * SCALE as f64).round() as u64, SCALE);
    MeasureReport {
        coverage: f(r.coverage),
        recall: r.recall.map(f),
        precision: f(r.precision),
        efficiency_all: f(r.efficiency_all),
        efficiency_first: f(r.efficiency_first),
        s_size: r.size as u64,
        t_size: 0,
        t_rel_size: 0,
        m_size: 0,
        domain_size: 0,
        range_size: 0,
        total_requests: r.total_requests,
        queries: r.queries,
        first_domain_size: 0,
    }
}
