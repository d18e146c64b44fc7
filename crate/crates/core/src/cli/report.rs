//! Plot-ready CSV reports, computed from the warehouse files alone.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::CliError;
use crate::corpus::Category;
use crate::evaluator::warehouse::{aggregates_from_rows, read_measures, read_pages, WarehouseError};
use crate::evaluator::{generator_order, next_link_analysis, AggregateRow, DEFAULT_CUTOFFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    /// Mean coverage: one row per generator, one column per category.
    CoverageByCategory,
    /// Recall relative to coverage, with coverage normalized to 100.
    CoverageRecallRatio,
    /// Mean efficiency over all requests and over first requests.
    EfficiencyByCategory,
    /// Current-page precision against next-page precision, one row per page.
    NextlinkScatter,
    /// Mean next-page precision per current-page precision bin.
    NextlinkCutoffs,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::CoverageByCategory,
        ReportKind::CoverageRecallRatio,
        ReportKind::EfficiencyByCategory,
        ReportKind::NextlinkScatter,
        ReportKind::NextlinkCutoffs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::CoverageByCategory => "coverage-by-category",
            ReportKind::CoverageRecallRatio => "coverage-recall-ratio",
            ReportKind::EfficiencyByCategory => "efficiency-by-category",
            ReportKind::NextlinkScatter => "nextlink-scatter",
            ReportKind::NextlinkCutoffs => "nextlink-cutoffs",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = ReportKind::ALL.iter().map(|k| k.as_str()).collect();
            CliError::Usage(format!("unknown report kind {s:?}; expected one of {}", known.join(", ")))
        })
    }
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            rows: vec![header.iter().map(|h| h.as_ref().to_string()).collect()],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn into_csv(self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Aggregate rows keyed by generator, then category name.
fn by_generator(rows: &[AggregateRow]) -> BTreeMap<(u64, String), BTreeMap<&str, &AggregateRow>> {
    let mut out: BTreeMap<(u64, String), BTreeMap<&str, &AggregateRow>> = BTreeMap::new();
    for r in rows {
        out.entry(generator_order(&r.generator_id))
            .or_default()
            .insert(r.category.as_str(), r);
    }
    out
}

/// A column suffix and how to read the value.
type Column = (&'static str, fn(&AggregateRow) -> Option<f64>);

fn wide(rows: &[AggregateRow], columns: &[Column]) -> Table {
    let mut header = vec!["generator_id".to_string()];
    for c in Category::ALL {
        for (suffix, _) in columns {
            header.push(if suffix.is_empty() {
                c.as_str().to_string()
            } else {
                format!("{c}_{suffix}")
            });
        }
    }
    let mut table = Table::new(&header);
    for ((_, generator), cats) in by_generator(rows) {
        let mut row = vec![generator];
        for c in Category::ALL {
            for (_, get) in columns {
                row.push(opt(cats.get(c.as_str()).and_then(|r| get(r))));
            }
        }
        table.push(row);
    }
    table
}

/// Renders one report from the warehouse in `dir`.
pub fn render_report(dir: impl AsRef<Path>, kind: ReportKind) -> Result<String, CliError> {
    let dir = dir.as_ref();
    let measures = read_measures(dir)?;
    if measures.is_empty() {
        return Err(WarehouseError::Empty(dir.display().to_string()).into());
    }
    let aggregates = aggregates_from_rows(&measures);
    let table = match kind {
        ReportKind::CoverageByCategory => wide(&aggregates, &[("", |r| Some(r.coverage))]),
        ReportKind::EfficiencyByCategory => wide(
            &aggregates,
            &[("all", |r| Some(r.efficiency_all)), ("first", |r| Some(r.efficiency_first))],
        ),
        ReportKind::CoverageRecallRatio => {
            let mut t = Table::new(&["generator_id", "category", "coverage", "recall", "coverage_pct", "recall_pct"]);
            for ((_, generator), cats) in by_generator(&aggregates) {
                let names = Category::ALL.iter().map(|c| c.as_str()).chain(["all"]);
                for name in names {
                    let Some(r) = cats.get(name) else { continue };
                    let pct = r.recall.filter(|_| r.coverage > 0.0).map(|rec| 100.0 * rec / r.coverage);
                    t.push(vec![
                        generator.clone(),
                        name.to_string(),
                        num(r.coverage),
                        opt(r.recall),
                        num(100.0),
                        opt(pct),
                    ]);
                }
            }
            t
        }
        ReportKind::NextlinkScatter => {
            let mut t = Table::new(&["run_id", "query_id", "page", "page_precision", "next_page_precision"]);
            for s in read_pages(dir)? {
                let Some(next) = s.next_page_precision else { continue };
                t.push(vec![s.run_id, s.query_id, s.page.to_string(), num(s.page_precision), num(next)]);
            }
            t
        }
        ReportKind::NextlinkCutoffs => {
            let summary = next_link_analysis(&read_pages(dir)?, &DEFAULT_CUTOFFS);
            let mut t = Table::new(&[
                "cutoff",
                "bin_low",
                "bin_samples",
                "mean_next_bin",
                "below",
                "mean_next_below",
                "at_or_above",
                "mean_next_at_or_above",
            ]);
            for r in &summary.cutoffs {
                t.push(vec![
                    num(r.cutoff),
                    num(r.bin_low),
                    r.bin.to_string(),
                    opt(r.mean_next_bin),
                    r.below.to_string(),
                    opt(r.mean_next_below),
                    r.at_or_above.to_string(),
                    opt(r.mean_next_at_or_above),
                ]);
            }
            t
        }
    };
    table.into_csv()
}
