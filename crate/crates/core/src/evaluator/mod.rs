//! Executing query plans, matching the results and measuring the outcome.
//!
//! [`execute_plan`] runs a plan page by page under a [`FollowPolicy`] and
//! records every request. [`run_experiment`] sweeps a grid of datasets and
//! generators against one engine index in parallel; the result can be
//! persisted with [`warehouse::write_warehouse`].

mod measures;
mod nextlink;
pub mod warehouse;

pub use measures::{compute_measures, Fraction, MeasureReport};
pub use nextlink::{
    next_link_analysis, page_samples, CutoffRow, NextLinkSummary, PagePrecisionSample,
    DEFAULT_CUTOFFS,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{Category, Corpus, Dataset, IndexProvenance, Publication};
use crate::engine::{EngineCapabilities, EngineIndex, Rejection};
use crate::generators::{build_plan, GeneratorSpec, PlanFlag, QueryPlan, TitleContext};
use crate::matcher::{match_entities, MatchConfig, MatchMapping};

/// When to follow a "next" link.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FollowPolicy {
    /// Every page up to the engine's page limit.
    #[default]
    AllPages,
    FirstPageOnly,
    /// Stop once a page's share of relevant entities drops below the value.
    PrecisionThreshold(f64),
}

impl fmt::Display for FollowPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FollowPolicy::AllPages => f.write_str("all-pages"),
            FollowPolicy::FirstPageOnly => f.write_str("first-page-only"),
            FollowPolicy::PrecisionThreshold(t) => write!(f, "precision-threshold({t})"),
        }
    }
}

impl FromStr for FollowPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all-pages" => Ok(FollowPolicy::AllPages),
            "first-page-only" => Ok(FollowPolicy::FirstPageOnly),
            t => t
                .strip_prefix("precision-threshold(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| (0.0..=1.0).contains(v))
                .map(FollowPolicy::PrecisionThreshold)
                .ok_or_else(|| {
                    format!(
                        "expected all-pages, first-page-only or precision-threshold(x) with x in [0,1], found {s:?}"
                    )
                }),
        }
    }
}

impl Serialize for FollowPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FollowPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageTrace {
    /// 1-based, sequential across the whole run.
    pub request: usize,
    /// 1-based page number within the query.
    pub page: usize,
    pub entities: Vec<String>,
    pub has_next: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub query: String,
    pub query_id: String,
    /// Input ids of the partitions behind the query.
    pub covers: Vec<String>,
    pub pages: Vec<PageTrace>,
}

/// Every request issued for one plan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub queries: Vec<QueryTrace>,
    pub total_requests: usize,
}

impl Execution {
    /// Distinct entity ids over all pages.
    pub fn returned(&self) -> BTreeSet<&str> {
        self.pages().flat_map(|p| p.entities.iter().map(String::as_str)).collect()
    }

    /// Distinct entity ids on first pages.
    pub fn first_page_entities(&self) -> BTreeSet<&str> {
        self.queries
            .iter()
            .filter_map(|q| q.pages.first())
            .flat_map(|p| p.entities.iter().map(String::as_str))
            .collect()
    }

    pub fn pages(&self) -> impl Iterator<Item = &PageTrace> {
        self.queries.iter().flat_map(|q| q.pages.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("query {query} rejected: {rejection}")]
pub struct ExecError {
    pub query: String,
    pub rejection: Rejection,
}

fn page_precision(entities: &[&Publication], relevant: &BTreeSet<String>) -> f64 {
    if entities.is_empty() {
        return 0.0;
    }
    let hits = entities.iter().filter(|p| relevant.contains(&p.id)).count();
    hits as f64 / entities.len() as f64
}

/// Runs every query of `plan`, fetching pages as `policy` dictates.
///
/// `relevant` is only consulted by [`FollowPolicy::PrecisionThreshold`].
pub fn execute_plan(
    plan: &QueryPlan,
    index: &EngineIndex,
    caps: &EngineCapabilities,
    policy: FollowPolicy,
    relevant: &BTreeSet<String>,
) -> Result<Execution, ExecError> {
    let mut execution = Execution::default();
    for (q, planned) in plan.queries.iter().enumerate() {
        let text = planned.query.to_string();
        let results = index.search(&planned.query, caps).map_err(|rejection| ExecError {
            query: text.clone(),
            rejection,
        })?;
        let mut pages = Vec::new();
        let mut number = 1;
        loop {
            let page = results.page(number);
            execution.total_requests += 1;
            let follow = page.has_next
                && match policy {
                    FollowPolicy::AllPages => true,
                    FollowPolicy::FirstPageOnly => false,
                    FollowPolicy::PrecisionThreshold(t) => page_precision(&page.entities, relevant) >= t,
                };
            pages.push(PageTrace {
                request: execution.total_requests,
                page: number,
                entities: page.entities.iter().map(|p| p.id.clone()).collect(),
                has_next: page.has_next,
            });
            if !follow {
                break;
            }
            number += 1;
        }
        execution.queries.push(QueryTrace {
            query: text,
            query_id: results.query_id().to_string(),
            covers: plan.covered_by(q).map(str::to_string).collect(),
            pages,
        });
    }
    Ok(execution)
}

/// Index entities derived from any member of `inputs`.
pub fn t_rel<S: AsRef<str>>(inputs: &[S], provenance: &IndexProvenance) -> BTreeSet<String> {
    let wanted: BTreeSet<&str> = inputs.iter().map(AsRef::as_ref).collect();
    provenance
        .iter()
        .filter(|(_, source)| source.is_some_and(|s| wanted.contains(s)))
        .map(|(id, _)| id.to_string())
        .collect()
}

/// Trace of one (dataset, generator) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub dataset_id: String,
    pub category: Category,
    pub size: usize,
    pub generator_id: String,
    pub engine_id: String,
    pub seed: u64,
    pub policy: FollowPolicy,
    pub queries: Vec<QueryTrace>,
    pub total_requests: usize,
    pub flags: Vec<PlanFlag>,
    /// The only field that differs between identical runs.
    pub wall_time_ms: u64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn execution(&self) -> Execution {
        Execution {
            queries: self.queries.clone(),
            total_requests: self.total_requests,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub record: RunRecord,
    pub measures: Option<MeasureReport>,
    pub mapping: MatchMapping,
    pub pages: Vec<PagePrecisionSample>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.record.error.is_some()
    }
}

/// Everything shared by the cells of one experiment.
pub struct ExperimentContext<'a> {
    pub corpus: &'a Corpus,
    pub titles: TitleContext,
    pub index: &'a EngineIndex,
    pub provenance: &'a IndexProvenance,
    pub caps: &'a EngineCapabilities,
    pub match_config: MatchConfig,
    pub policy: FollowPolicy,
}

impl<'a> ExperimentContext<'a> {
    pub fn new(
        corpus: &'a Corpus,
        index: &'a EngineIndex,
        provenance: &'a IndexProvenance,
        caps: &'a EngineCapabilities,
    ) -> Self {
        ExperimentContext {
            corpus,
            titles: TitleContext::new(corpus),
            index,
            provenance,
            caps,
            match_config: MatchConfig::default(),
            policy: FollowPolicy::AllPages,
        }
    }

    pub fn with_policy(mut self, policy: FollowPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_match_config(mut self, config: MatchConfig) -> Self {
        self.match_config = config;
        self
    }

    /// Plans, executes, matches and measures one cell. Failures are
    /// recorded in the result rather than returned.
    pub fn run_cell(&self, dataset: &Dataset, spec: &GeneratorSpec) -> CellResult {
        let started = Instant::now();
        let mut record = RunRecord {
            run_id: format!("{}/{}", dataset.id, spec.id),
            dataset_id: dataset.id.clone(),
            category: dataset.category,
            size: dataset.size,
            generator_id: spec.id.clone(),
            engine_id: self.caps.id.clone(),
            seed: dataset.seed,
            policy: self.policy,
            queries: Vec::new(),
            total_requests: 0,
            flags: Vec::new(),
            wall_time_ms: 0,
            error: None,
        };
        let outcome = self.evaluate(dataset, spec, &mut record);
        record.wall_time_ms = started.elapsed().as_millis() as u64;
        match outcome {
            Ok((measures, mapping, pages)) => CellResult {
                record,
                measures: Some(measures),
                mapping,
                pages,
            },
            Err(error) => {
                record.error = Some(error);
                CellResult {
                    record,
                    measures: None,
                    mapping: MatchMapping::default(),
                    pages: Vec::new(),
                }
            }
        }
    }

    fn evaluate(
        &self,
        dataset: &Dataset,
        spec: &GeneratorSpec,
        record: &mut RunRecord,
    ) -> Result<(MeasureReport, MatchMapping, Vec<PagePrecisionSample>), String> {
        let inputs = self
            .corpus
            .resolve(&dataset.members)
            .ok_or_else(|| format!("dataset {} has members outside the corpus", dataset.id))?;
        let plan = build_plan(spec, &inputs, self.caps, &self.titles).map_err(|e| e.to_string())?;
        record.flags = plan.flags.clone();
        let relevant = t_rel(&dataset.members, self.provenance);
        let execution =
            execute_plan(&plan, self.index, self.caps, self.policy, &relevant).map_err(|e| e.to_string())?;
        let returned: Vec<&Publication> = execution
            .returned()
            .into_iter()
            .map(|id| self.index.get(id).expect("returned ids are indexed"))
            .collect();
        let mapping = match_entities(&inputs, &returned, &self.match_config);
        let input_ids: BTreeSet<&str> = dataset.members.iter().map(String::as_str).collect();
        let measures = compute_measures(&execution, &mapping, &input_ids, &relevant);
        let pages = page_samples(&record.run_id, &execution, &relevant);
        record.queries = execution.queries;
        record.total_requests = execution.total_requests;
        Ok((measures, mapping, pages))
    }
}

/// Results of a full sweep, ordered dataset-major in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub cells: Vec<CellResult>,
}

impl Experiment {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.failed()).count()
    }

    pub fn samples(&self) -> impl Iterator<Item = &PagePrecisionSample> {
        self.cells.iter().flat_map(|c| c.pages.iter())
    }

    pub fn next_link_summary(&self) -> NextLinkSummary {
        let samples: Vec<PagePrecisionSample> = self.samples().cloned().collect();
        next_link_analysis(&samples, &DEFAULT_CUTOFFS)
    }

    /// Mean measures per (category, generator) and per generator overall.
    pub fn aggregates(&self) -> Vec<AggregateRow> {
        aggregate(self.cells.iter().filter_map(|c| {
            c.measures
                .as_ref()
                .map(|m| (c.record.category.as_str(), c.record.generator_id.as_str(), m))
        }))
    }
}

/// Unweighted means of the cells of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// A category name, or `all`.
    pub category: String,
    pub generator_id: String,
    pub cells: usize,
    pub coverage: f64,
    /// Mean over the cells where recall is defined.
    pub recall: Option<f64>,
    pub precision: f64,
    pub efficiency_all: f64,
    pub efficiency_first: f64,
}

#[derive(Default)]
struct Sums {
    cells: usize,
    coverage: f64,
    recall: f64,
    recall_cells: usize,
    precision: f64,
    efficiency_all: f64,
    efficiency_first: f64,
}

impl Sums {
    fn add(&mut self, m: &MeasureReport) {
        self.cells += 1;
        self.coverage += m.coverage.value();
        if let Some(r) = m.recall {
            self.recall += r.value();
            self.recall_cells += 1;
        }
        self.precision += m.precision.value();
        self.efficiency_all += m.efficiency_all.value();
        self.efficiency_first += m.efficiency_first.value();
    }

    fn row(&self, category: &str, generator: &str) -> AggregateRow {
        let n = self.cells as f64;
        AggregateRow {
            category: category.to_string(),
            generator_id: generator.to_string(),
            cells: self.cells,
            coverage: self.coverage / n,
            recall: (self.recall_cells > 0).then(|| self.recall / self.recall_cells as f64),
            precision: self.precision / n,
            efficiency_all: self.efficiency_all / n,
            efficiency_first: self.efficiency_first / n,
        }
    }
}

/// Orders generator ids numerically when they are numbers.
pub fn generator_order(id: &str) -> (u64, String) {
    (id.parse().unwrap_or(u64::MAX), id.to_string())
}

fn category_order(c: &str) -> usize {
    Category::ALL
        .iter()
        .position(|k| k.as_str() == c)
        .unwrap_or(Category::ALL.len())
}

/// Groups `(category, generator, measures)` triples into mean rows, sorted
/// by category then generator, with the `all` rows last.
pub fn aggregate<'a>(cells: impl Iterator<Item = (&'a str, &'a str, &'a MeasureReport)>) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(usize, String, (u64, String)), Sums> = BTreeMap::new();
    for (category, generator, m) in cells {
        let g = generator_order(generator);
        groups
            .entry((category_order(category), category.to_string(), g.clone()))
            .or_default()
            .add(m);
        groups.entry((usize::MAX, "all".to_string(), g)).or_default().add(m);
    }
    groups
        .iter()
        .map(|((_, category, (_, generator)), sums)| sums.row(category, generator))
        .collect()
}

/// Runs every (dataset, spec) pair on up to `jobs` threads; `None` uses
/// all cores. Output order does not depend on scheduling.
pub fn run_experiment(
    ctx: &ExperimentContext<'_>,
    datasets: &[Dataset],
    specs: &[GeneratorSpec],
    jobs: Option<usize>,
) -> Experiment {
    let grid: Vec<(&Dataset, &GeneratorSpec)> = datasets
        .iter()
        .flat_map(|d| specs.iter().map(move |s| (d, s)))
        .collect();
    let run = || -> Vec<CellResult> { grid.par_iter().map(|(d, s)| ctx.run_cell(d, s)).collect() };
    let cells = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    Experiment { cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, example_publications, NoiseProfile};
    use crate::engine::{scholar_profile, BasicQuery, Query, SearchValue};
    use crate::generators::{standard_catalog, Partition, PlannedQuery};

    fn many_smiths(n: usize) -> Vec<Publication> {
        (0..n)
            .map(|i| Publication::new(format!("p{i:03}"), &["J. Smith"], format!("paper number {i}"), 2000, "v"))
            .collect()
    }

    fn author_plan(ids: &[String]) -> QueryPlan {
        QueryPlan {
            generator: "t".into(),
            partitions: vec![Partition {
                members: ids.to_vec(),
                anchor: Vec::new(),
            }],
            queries: vec![PlannedQuery {
                query: Query::from(BasicQuery::single("author", SearchValue::keywords(["smith"]))),
                partitions: vec![0],
            }],
            flags: Vec::new(),
        }
    }

    #[test]
    fn pagination_requests() {
        let pubs = many_smiths(519);
        let ids: Vec<String> = pubs.iter().map(|p| p.id.clone()).collect();
        let index = EngineIndex::from_publications(pubs);
        let caps = scholar_profile();
        let plan = author_plan(&ids);
        let relevant: BTreeSet<String> = ids.iter().cloned().collect();
        let all = execute_plan(&plan, &index, &caps, FollowPolicy::AllPages, &relevant).unwrap();
        assert_eq!(all.total_requests, 6);
        assert_eq!(all.queries[0].pages.last().unwrap().entities.len(), 19);
        assert_eq!(all.returned().len(), 519);
        let first = execute_plan(&plan, &index, &caps, FollowPolicy::FirstPageOnly, &relevant).unwrap();
        assert_eq!(first.total_requests, 1);
        let none = BTreeSet::new();
        let thr = execute_plan(&plan, &index, &caps, FollowPolicy::PrecisionThreshold(0.15), &none).unwrap();
        assert_eq!(thr.total_requests, 1);
        let thr = execute_plan(&plan, &index, &caps, FollowPolicy::PrecisionThreshold(0.15), &relevant).unwrap();
        assert_eq!(thr.total_requests, 6);
        let requests: Vec<usize> = all.pages().map(|p| p.request).collect();
        assert_eq!(requests, [1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn policy_text_roundtrip() {
        for p in [
            FollowPolicy::AllPages,
            FollowPolicy::FirstPageOnly,
            FollowPolicy::PrecisionThreshold(0.15),
        ] {
            assert_eq!(p.to_string().parse::<FollowPolicy>().unwrap(), p);
        }
        assert!("precision-threshold(2)".parse::<FollowPolicy>().is_err());
        assert!("sometimes".parse::<FollowPolicy>().is_err());
    }

    #[test]
    fn relevant_sets_follow_provenance() {
        let corpus = Corpus::new(example_publications()).unwrap();
        let (_, prov) = build_index(&corpus, &NoiseProfile::zero()).unwrap();
        assert_eq!(t_rel(&["s1"], &prov), BTreeSet::from(["s1".to_string()]));
        let prov = IndexProvenance::new(vec![
            ("s1".into(), Some("s1".into())),
            ("s1~1".into(), Some("s1".into())),
            ("s1~2".into(), Some("s1".into())),
            ("x0".into(), None),
        ]);
        assert_eq!(t_rel(&["s1"], &prov).len(), 3);
        assert!(t_rel(&["s3"], &prov).is_empty());
    }

    #[test]
    fn table1_cells() {
        let corpus = Corpus::new(example_publications()).unwrap();
        let (index, prov) = build_index(&corpus, &NoiseProfile::zero()).unwrap();
        let caps = scholar_profile();
        let ctx = ExperimentContext::new(&corpus, &index, &prov, &caps);
        let dataset = Dataset {
            id: "t1".into(),
            category: Category::Random,
            size: 3,
            seed: 1,
            members: vec!["s1".into(), "s2".into(), "s3".into()],
        };
        let exp = run_experiment(&ctx, &[dataset], &standard_catalog(), Some(2));
        assert_eq!(exp.cells.len(), 10);
        assert_eq!(exp.failures(), 0);
        let ids: Vec<&str> = exp.cells.iter().map(|c| c.record.generator_id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
        for c in &exp.cells {
            let m = c.measures.as_ref().unwrap();
            assert!(m.identities_hold());
            assert_eq!(m.coverage, Fraction { num: 1, den: 1 }, "generator {}", c.record.generator_id);
        }
        let five = &exp.cells[4];
        assert_eq!(five.record.total_requests, 2);
        let rows = exp.aggregates();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows.last().unwrap().category, "all");
        assert_eq!(rows.last().unwrap().generator_id, "10");
    }

    #[test]
    fn failed_cells_are_recorded() {
        let corpus = Corpus::new(example_publications()).unwrap();
        let (index, prov) = build_index(&corpus, &NoiseProfile::zero()).unwrap();
        let mut caps = scholar_profile();
        caps.predicates.retain(|p| p.name != "intitle");
        let ctx = ExperimentContext::new(&corpus, &index, &prov, &caps);
        let dataset = Dataset {
            id: "t1".into(),
            category: Category::Random,
            size: 1,
            seed: 1,
            members: vec!["s1".into()],
        };
        let exp = run_experiment(&ctx, &[dataset], &standard_catalog()[..5], None);
        assert_eq!(exp.failures(), 4);
        assert!(!exp.cells[4].failed());
        assert!(exp.cells[0].record.error.as_ref().unwrap().contains("intitle"));
    }
}
