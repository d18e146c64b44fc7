//! Is following a "next" link worth a request? Per-page precision samples
//! and their summary over a grid of current-page precision cutoffs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Execution;

/// Current-page precision cutoffs reported by default.
pub const DEFAULT_CUTOFFS: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 1.0];

/// One fetched page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PagePrecisionSample {
    pub run_id: String,
    pub query_id: String,
    pub page: usize,
    /// Share of the page's entities that are relevant; 0 for empty pages.
    pub page_precision: f64,
    pub next_offered: bool,
    /// Present when a next link was offered and the next page was fetched.
    pub next_page_precision: Option<f64>,
}

fn precision(entities: &[String], relevant: &BTreeSet<String>) -> f64 {
    if entities.is_empty() {
        return 0.0;
    }
    entities.iter().filter(|e| relevant.contains(*e)).count() as f64 / entities.len() as f64
}

/// One sample per fetched page of `execution`.
pub fn page_samples(run_id: &str, execution: &Execution, relevant: &BTreeSet<String>) -> Vec<PagePrecisionSample> {
    let mut out = Vec::new();
    for q in &execution.queries {
        for (i, page) in q.pages.iter().enumerate() {
            let next = q.pages.get(i + 1).filter(|_| page.has_next);
            out.push(PagePrecisionSample {
                run_id: run_id.to_string(),
                query_id: q.query_id.clone(),
                page: page.page,
                page_precision: precision(&page.entities, relevant),
                next_offered: page.has_next,
                next_page_precision: next.map(|n| precision(&n.entities, relevant)),
            });
        }
    }
    out
}

/// Samples whose current-page precision lies below / at or above a cutoff,
/// and those in the bin between the previous cutoff and this one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub cutoff: f64,
    pub bin_low: f64,
    pub bin: usize,
    pub mean_next_bin: Option<f64>,
    pub below: usize,
    pub mean_next_below: Option<f64>,
    pub at_or_above: usize,
    pub mean_next_at_or_above: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextLinkSummary {
    pub pages: usize,
    pub pages_offering_next: usize,
    /// `pages_offering_next / pages`; 0 without pages.
    pub next_link_fraction: f64,
    /// Pages whose successor was fetched.
    pub samples: usize,
    pub cutoffs: Vec<CutoffRow>,
}

impl NextLinkSummary {
    /// Current-page precision below which a next link is not worth
    /// following: the upper edge of the highest bin whose mean next-page
    /// precision misses `target`. `None` when no bin misses it, or when no
    /// populated bin lies above the last one that does.
    pub fn recommended_cutoff(&self, target: f64) -> Option<f64> {
        let short = self
            .cutoffs
            .iter()
            .rposition(|r| r.mean_next_bin.is_some_and(|m| m < target))?;
        let rest = &self.cutoffs[short + 1..];
        rest.iter()
            .any(|r| r.bin > 0)
            .then(|| self.cutoffs[short].cutoff)
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn next_link_analysis(samples: &[PagePrecisionSample], cutoffs: &[f64]) -> NextLinkSummary {
    let pages = samples.len();
    let pages_offering_next = samples.iter().filter(|s| s.next_offered).count();
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.next_page_precision.map(|n| (s.page_precision, n)))
        .collect();
    let rows = cutoffs
        .iter()
        .enumerate()
        .map(|(i, &cutoff)| {
            let bin_low = if i == 0 { 0.0 } else { cutoffs[i - 1] };
            let (below, above): (Vec<_>, Vec<_>) = pairs.iter().partition(|(p, _)| *p < cutoff);
            let next = |v: &[(f64, f64)]| mean(&v.iter().map(|(_, n)| *n).collect::<Vec<_>>());
            let bin: Vec<(f64, f64)> = below.iter().copied().filter(|(p, _)| *p >= bin_low).collect();
            CutoffRow {
                cutoff,
                bin_low,
                bin: bin.len(),
                mean_next_bin: next(&bin),
                below: below.len(),
                mean_next_below: next(&below),
                at_or_above: above.len(),
                mean_next_at_or_above: next(&above),
            }
        })
        .collect();
    NextLinkSummary {
        pages,
        pages_offering_next,
        next_link_fraction: if pages == 0 {
            0.0
        } else {
            pages_offering_next as f64 / pages as f64
        },
        samples: pairs.len(),
        cutoffs: rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::{PageTrace, QueryTrace};

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn thirty_of_hundred() {
        let mut page = ids("r", 30);
        page.extend(ids("x", 70));
        let next = ids("r", 5).into_iter().chain(ids("y", 15)).collect::<Vec<_>>();
        let relevant: BTreeSet<String> = ids("r", 30).into_iter().collect();
        let exec = Execution {
            queries: vec![QueryTrace {
                query: "q".into(),
                query_id: "q".into(),
                covers: Vec::new(),
                pages: vec![
                    PageTrace { request: 1, page: 1, entities: page, has_next: true },
                    PageTrace { request: 2, page: 2, entities: next, has_next: false },
                ],
            }],
            total_requests: 2,
        };
        let s = page_samples("run", &exec, &relevant);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].page_precision, 0.3);
        assert_eq!(s[0].next_page_precision, Some(0.25));
        assert_eq!(s[1].next_page_precision, None);
        let summary = next_link_analysis(&s, &DEFAULT_CUTOFFS);
        assert_eq!(summary.pages, 2);
        assert_eq!(summary.pages_offering_next, 1);
        assert_eq!(summary.samples, 1);
        assert_eq!(summary.next_link_fraction, 0.5);
    }

    #[test]
    fn no_pagination_no_samples() {
        let exec = Execution {
            queries: vec![QueryTrace {
                query: "q".into(),
                query_id: "q".into(),
                covers: Vec::new(),
                pages: vec![PageTrace { request: 1, page: 1, entities: ids("r", 3), has_next: false }],
            }],
            total_requests: 1,
        };
        let s = page_samples("run", &exec, &BTreeSet::new());
        let summary = next_link_analysis(&s, &DEFAULT_CUTOFFS);
        assert_eq!(summary.samples, 0);
        assert_eq!(summary.next_link_fraction, 0.0);
        assert_eq!(summary.recommended_cutoff(0.05), None);
    }

    #[test]
    fn cutoff_recommendation() {
        let sample = |p: f64, n: f64| PagePrecisionSample {
            run_id: "r".into(),
            query_id: "q".into(),
            page: 1,
            page_precision: p,
            next_offered: true,
            next_page_precision: Some(n),
        };
        let samples = vec![sample(0.02, 0.0), sample(0.1, 0.01), sample(0.2, 0.08), sample(0.5, 0.3)];
        let summary = next_link_analysis(&samples, &DEFAULT_CUTOFFS);
        assert_eq!(summary.recommended_cutoff(0.05), Some(0.15));
        assert_eq!(summary.recommended_cutoff(0.001), Some(0.05));
        assert_eq!(summary.recommended_cutoff(0.5), None);
        let row = &summary.cutoffs[2];
        assert_eq!((row.below, row.at_or_above), (2, 2));
        assert_eq!(row.mean_next_below, Some(0.005));
    }
}
