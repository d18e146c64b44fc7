//! Query generators: partitioning, attribute-to-predicate mapping, search
//! value generation and OR aggregation, plus the catalog of ten reference
//! generators.
//!
//! Generator specs load from TOML files whose `format` key is
//! `qf-genspec-1`:
//!
//! ```toml
//! format = "qf-genspec-1"
//! id = "7"
//! aggregation = "none"            # or "or(2)"
//!
//! [partitioning]
//! strategy = "frequent-value"     # or "naive"
//! attributes = ["authors", "title", "year"]
//! min_support = 2
//! items_required = 2
//!
//! [[mapping]]
//! attribute = "authors"
//! predicate = "author"
//!
//! [value_gen]
//! authors = "gs_authors"
//! title = "keywords:default"
//! ```

mod partition;
mod values;

pub use partition::{items_of, partition_frequent_value, partition_naive, Item, Partition};
pub use values::{
    gen_pattern, gen_value, keywords_of, pattern_of, Generated, TitleContext, ValueFlag, ValueGen,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Attribute, Publication};
use crate::engine::{BasicQuery, EngineCapabilities, Query, SearchValue, Term, ValueKind};
use crate::text::{last_name, tokenize, Stopwords};

pub const GENSPEC_FORMAT: &str = "qf-genspec-1";
pub const DEFAULT_MIN_SUPPORT: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Partitioning {
    Naive,
    FrequentValue {
        attributes: Vec<Attribute>,
        min_support: usize,
        items_required: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    None,
    /// Up to `k` basic queries per query.
    Or(usize),
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregation::None => f.write_str("none"),
            Aggregation::Or(k) => write!(f, "or({k})"),
        }
    }
}

impl FromStr for Aggregation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "none" {
            return Ok(Aggregation::None);
        }
        t.strip_prefix("or(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|k| k.trim().parse().ok())
            .map(Aggregation::Or)
            .ok_or_else(|| format!("expected \"none\" or \"or(k)\", found {s:?}"))
    }
}

/// A query generator built from the four building blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub id: String,
    pub partitioning: Partitioning,
    /// Each mapped attribute contributes one term per basic query.
    pub mapping: Vec<(Attribute, String)>,
    pub value_gen: BTreeMap<Attribute, ValueGen>,
    pub aggregation: Aggregation,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid generator spec at {field}: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("engine has no predicate {predicate:?}")]
    UnknownPredicate { predicate: String },
    #[error("predicate {predicate:?} does not accept {kind} values")]
    UnsupportedKind { predicate: String, kind: ValueKind },
    #[error("aggregation {aggregation} not supported: {reason}")]
    Aggregation { aggregation: Aggregation, reason: String },
    #[error("input set is empty")]
    EmptyInput,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse generator spec: {0}")]
    Parse(String),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> PlanError {
    PlanError::InvalidSpec {
        field: field.into(),
        reason: reason.into(),
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.id.trim().is_empty() {
            return Err(invalid("id", "must not be empty"));
        }
        if self.mapping.is_empty() {
            return Err(invalid("mapping", "at least one attribute must be mapped"));
        }
        for (i, (attribute, predicate)) in self.mapping.iter().enumerate() {
            if predicate.trim().is_empty() {
                return Err(invalid(format!("mapping[{i}].predicate"), "must not be empty"));
            }
            let Some(generator) = self.value_gen.get(attribute) else {
                return Err(invalid(
                    format!("value_gen.{attribute}"),
                    "mapped attribute has no value generator",
                ));
            };
            if !generator.applies_to(*attribute) {
                return Err(invalid(
                    format!("value_gen.{attribute}"),
                    format!("{generator} does not apply to {attribute}"),
                ));
            }
            if let ValueGen::Keywords(list) = generator {
                if Stopwords::by_id(list).is_none() {
                    return Err(invalid(
                        format!("value_gen.{attribute}"),
                        format!("unknown stopword list {list:?}"),
                    ));
                }
            }
        }
        if let Partitioning::FrequentValue {
            attributes,
            min_support,
            items_required,
        } = &self.partitioning
        {
            if attributes.is_empty() {
                return Err(invalid("partitioning.attributes", "must not be empty"));
            }
            for a in attributes {
                if !self.mapping.iter().any(|(m, _)| m == a) {
                    return Err(invalid(
                        "partitioning.attributes",
                        format!("{a} is not mapped to a predicate"),
                    ));
                }
            }
            if *min_support < 2 {
                return Err(invalid("partitioning.min_support", "must be at least 2"));
            }
            if *items_required < 1 {
                return Err(invalid("partitioning.items_required", "must be at least 1"));
            }
        }
        if let Aggregation::Or(k) = self.aggregation {
            if k < 2 {
                return Err(invalid("aggregation", "or(k) requires k >= 2"));
            }
        }
        Ok(())
    }

    /// Checks that every term the spec can emit is accepted by `caps`.
    pub fn check_capabilities(&self, caps: &EngineCapabilities) -> Result<(), PlanError> {
        for (attribute, predicate) in &self.mapping {
            let descriptor = caps
                .predicate(predicate)
                .ok_or_else(|| PlanError::UnknownPredicate {
                    predicate: predicate.clone(),
                })?;
            let kind = self.value_gen[attribute].kind();
            if !descriptor.accepts.contains(&kind) {
                return Err(PlanError::UnsupportedKind {
                    predicate: predicate.clone(),
                    kind,
                });
            }
        }
        if let Aggregation::Or(k) = self.aggregation {
            let reason = if !caps.supports_or {
                Some(format!("engine {} has no OR", caps.id))
            } else if k > caps.max_disjuncts {
                Some(format!("engine {} allows at most {} disjuncts", caps.id, caps.max_disjuncts))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(PlanError::Aggregation {
                    aggregation: self.aggregation,
                    reason,
                });
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, PlanError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        if file.format != GENSPEC_FORMAT {
            return Err(invalid(
                "format",
                format!("expected {GENSPEC_FORMAT}, found {}", file.format),
            ));
        }
        let attr = |field: String, s: &str| -> Result<Attribute, PlanError> {
            s.parse().map_err(|e: String| invalid(field, e))
        };
        let partitioning = match file.partitioning.strategy.as_str() {
            "naive" => Partitioning::Naive,
            "frequent-value" => Partitioning::FrequentValue {
                attributes: file
                    .partitioning
                    .attributes
                    .iter()
                    .enumerate()
                    .map(|(i, a)| attr(format!("partitioning.attributes[{i}]"), a))
                    .collect::<Result<_, _>>()?,
                min_support: file.partitioning.min_support.unwrap_or(DEFAULT_MIN_SUPPORT),
                items_required: file.partitioning.items_required.unwrap_or(1),
            },
            other => {
                return Err(invalid(
                    "partitioning.strategy",
                    format!("expected \"naive\" or \"frequent-value\", found {other:?}"),
                ))
            }
        };
        let mapping = file
            .mapping
            .iter()
            .enumerate()
            .map(|(i, m)| Ok((attr(format!("mapping[{i}].attribute"), &m.attribute)?, m.predicate.clone())))
            .collect::<Result<Vec<_>, PlanError>>()?;
        let value_gen = file
            .value_gen
            .into_iter()
            .map(|(a, g)| Ok((attr(format!("value_gen.{a}"), &a)?, g)))
            .collect::<Result<BTreeMap<_, _>, PlanError>>()?;
        let aggregation = file
            .aggregation
            .parse()
            .map_err(|e: String| invalid("aggregation", e))?;
        let spec = GeneratorSpec {
            id: file.id,
            partitioning,
            mapping,
            value_gen,
            aggregation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlanError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| PlanError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let partitioning = match &self.partitioning {
            Partitioning::Naive => PartitioningFile {
                strategy: "naive".into(),
                attributes: Vec::new(),
                min_support: None,
                items_required: None,
            },
            Partitioning::FrequentValue {
                attributes,
                min_support,
                items_required,
            } => PartitioningFile {
                strategy: "frequent-value".into(),
                attributes: attributes.iter().map(|a| a.as_str().to_string()).collect(),
                min_support: Some(*min_support),
                items_required: Some(*items_required),
            },
        };
        let file = SpecFile {
            format: GENSPEC_FORMAT.into(),
            id: self.id.clone(),
            aggregation: self.aggregation.to_string(),
            partitioning,
            mapping: self
                .mapping
                .iter()
                .map(|(a, p)| MappingFile {
                    attribute: a.as_str().into(),
                    predicate: p.clone(),
                })
                .collect(),
            value_gen: self
                .value_gen
                .iter()
                .map(|(a, g)| (a.as_str().to_string(), g.clone()))
                .collect(),
        };
        toml::to_string(&file).expect("generator spec serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    format: String,
    id: String,
    #[serde(default = "no_aggregation")]
    aggregation: String,
    partitioning: PartitioningFile,
    mapping: Vec<MappingFile>,
    value_gen: BTreeMap<String, ValueGen>,
}

fn no_aggregation() -> String {
    "none".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitioningFile {
    strategy: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attributes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_support: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    items_required: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    attribute: String,
    predicate: String,
}

/// One query of a plan with the partitions it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedQuery {
    pub query: Query,
    /// Indices into [`QueryPlan::partitions`].
    pub partitions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFlag {
    pub entity: String,
    pub flag: ValueFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub generator: String,
    pub partitions: Vec<Partition>,
    pub queries: Vec<PlannedQuery>,
    pub flags: Vec<PlanFlag>,
}

impl QueryPlan {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    /// Member ids of the partitions annotated on query `q`.
    pub fn covered_by(&self, q: usize) -> impl Iterator<Item = &str> {
        self.queries[q]
            .partitions
            .iter()
            .flat_map(|&p| self.partitions[p].members.iter().map(String::as_str))
    }
}

/// Basic query for an anchored partition: only mapped attributes that occur
/// in the anchor contribute, using the anchor items as values.
fn anchored_query(spec: &GeneratorSpec, anchor: &[Item]) -> BasicQuery {
    let mut terms = Vec::new();
    for (attribute, predicate) in &spec.mapping {
        let items: Vec<&Item> = anchor.iter().filter(|i| i.attribute == *attribute).collect();
        if items.is_empty() {
            continue;
        }
        match &spec.value_gen[attribute] {
            ValueGen::Keywords(_) => {
                let words: Vec<String> = items.iter().flat_map(|i| tokenize(&i.value)).collect();
                terms.push(Term::new(predicate, SearchValue::Keywords(words)));
            }
            ValueGen::GsAuthors => {
                for i in items {
                    terms.push(Term::new(predicate, SearchValue::Keywords(vec![last_name(&i.value)])));
                }
            }
            ValueGen::Phrase => {
                for i in items {
                    terms.push(Term::new(predicate, SearchValue::phrase(&i.value)));
                }
            }
            ValueGen::Pattern => {
                for i in items {
                    terms.push(Term::new(predicate, SearchValue::pattern([&i.value])));
                }
            }
            ValueGen::Value => {
                for i in items {
                    terms.push(Term::new(predicate, SearchValue::value(&i.value)));
                }
            }
        }
    }
    BasicQuery::new(terms)
}

/// Turns `entities` into a query plan for an engine with `caps`.
pub fn build_plan(
    spec: &GeneratorSpec,
    entities: &[&Publication],
    caps: &EngineCapabilities,
    titles: &TitleContext,
) -> Result<QueryPlan, PlanError> {
    spec.validate()?;
    spec.check_capabilities(caps)?;
    if entities.is_empty() {
        return Err(PlanError::EmptyInput);
    }
    let partitions = match &spec.partitioning {
        Partitioning::Naive => partition_naive(entities),
        Partitioning::FrequentValue {
            attributes,
            min_support,
            items_required,
        } => partition_frequent_value(
            entities,
            attributes,
            *min_support,
            *items_required,
            Stopwords::default_list(),
        ),
    };
    let by_id: HashMap<&str, &Publication> = entities.iter().map(|p| (p.id.as_str(), *p)).collect();

    let mut flags = Vec::new();
    let mut basics = Vec::with_capacity(partitions.len());
    for partition in &partitions {
        if partition.anchor.is_empty() {
            let entity = by_id[partition.members[0].as_str()];
            let mut terms = Vec::new();
            for (attribute, predicate) in &spec.mapping {
                let g = gen_value(entity, *attribute, &spec.value_gen[attribute], None, titles);
                if let Some(flag) = g.flag {
                    flags.push(PlanFlag {
                        entity: entity.id.clone(),
                        flag,
                    });
                }
                terms.push(Term::new(predicate, g.value));
            }
            basics.push(BasicQuery::new(terms));
        } else {
            basics.push(anchored_query(spec, &partition.anchor));
        }
    }

    let chunk = match spec.aggregation {
        Aggregation::None => 1,
        Aggregation::Or(k) => k,
    };
    let queries = basics
        .chunks(chunk)
        .enumerate()
        .map(|(n, group)| PlannedQuery {
            query: Query::or(group.to_vec()),
            partitions: (n * chunk..n * chunk + group.len()).collect(),
        })
        .collect();
    Ok(QueryPlan {
        generator: spec.id.clone(),
        partitions,
        queries,
        flags,
    })
}

/// The ten reference generators, ids "1" to "10".
pub fn standard_catalog() -> Vec<GeneratorSpec> {
    use Attribute::*;
    let spec = |id: &str,
                partitioning: Partitioning,
                mapping: &[(Attribute, &str)],
                gens: Vec<(Attribute, ValueGen)>,
                aggregation: Aggregation| GeneratorSpec {
        id: id.to_string(),
        partitioning,
        mapping: mapping.iter().map(|(a, p)| (*a, p.to_string())).collect(),
        value_gen: gens.into_iter().collect(),
        aggregation,
    };
    let freq = |attributes: Vec<Attribute>, items_required: usize| Partitioning::FrequentValue {
        attributes,
        min_support: DEFAULT_MIN_SUPPORT,
        items_required,
    };
    let three_gens = || {
        vec![
            (Authors, ValueGen::GsAuthors),
            (Title, ValueGen::keywords()),
            (Year, ValueGen::Value),
        ]
    };
    let title_only = [(Title, "intitle")];
    let fielded = [(Authors, "author"), (Title, "intitle"), (Year, "year")];
    vec![
        spec("1", Partitioning::Naive, &title_only, vec![(Title, ValueGen::keywords())], Aggregation::None),
        spec("2", Partitioning::Naive, &title_only, vec![(Title, ValueGen::Phrase)], Aggregation::None),
        spec("3", Partitioning::Naive, &title_only, vec![(Title, ValueGen::Phrase)], Aggregation::Or(2)),
        spec("4", Partitioning::Naive, &fielded, three_gens(), Aggregation::None),
        spec(
            "5",
            freq(vec![Authors], 1),
            &[(Authors, "author")],
            vec![(Authors, ValueGen::GsAuthors)],
            Aggregation::None,
        ),
        spec("6", freq(vec![Title], 1), &title_only, vec![(Title, ValueGen::keywords())], Aggregation::None),
        spec("7", freq(vec![Authors, Title, Year], 2), &fielded, three_gens(), Aggregation::None),
        spec(
            "8",
            freq(vec![Authors, Title, Year], 2),
            &[(Authors, "free"), (Title, "free"), (Year, "free")],
            three_gens(),
            Aggregation::None,
        ),
        spec("9", Partitioning::Naive, &title_only, vec![(Title, ValueGen::Pattern)], Aggregation::None),
        spec("10", Partitioning::Naive, &title_only, vec![(Title, ValueGen::Pattern)], Aggregation::Or(10)),
    ]
}

/// Loads every `*.toml` generator spec in `dir`, sorted by file name.
pub fn load_catalog_dir(dir: impl AsRef<Path>) -> Result<Vec<GeneratorSpec>, PlanError> {
    let dir = dir.as_ref();
    let io = |source| PlanError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(GeneratorSpec::load).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example_publications;
    use crate::engine::{scholar_profile, validate};

    fn table1() -> (Vec<Publication>, TitleContext) {
        let pubs = example_publications();
        let ctx = TitleContext::from_titles(pubs.iter().map(|p| p.title.as_str()));
        (pubs, ctx)
    }

    fn spec(n: usize) -> GeneratorSpec {
        standard_catalog().into_iter().nth(n - 1).unwrap()
    }

    #[test]
    fn catalog_rows() {
        let cat = standard_catalog();
        assert_eq!(cat.len(), 10);
        for (i, s) in cat.iter().enumerate() {
            assert_eq!(s.id, (i + 1).to_string());
            s.validate().unwrap();
            s.check_capabilities(&scholar_profile()).unwrap();
        }
        assert!(cat[7].mapping.iter().all(|(_, p)| p == "free"));
        assert_eq!(cat[9].aggregation, Aggregation::Or(10));
        assert_eq!(cat[2].aggregation, Aggregation::Or(2));
        assert!(matches!(
            &cat[4].partitioning,
            Partitioning::FrequentValue { attributes, .. } if attributes == &[Attribute::Authors]
        ));
    }

    #[test]
    fn keyword_plan_on_table1() {
        let (pubs, ctx) = table1();
        let s: Vec<&Publication> = pubs.iter().collect();
        let plan = build_plan(&spec(1), &s, &scholar_profile(), &ctx).unwrap();
        let text: Vec<String> = plan.queries.iter().map(|q| q.query.to_string()).collect();
        assert_eq!(
            text,
            [
                "intitle:(keywords question 42)",
                "intitle:(keywords don't panic)",
                "intitle:(keywords hitchhiker's guide galaxy)",
            ]
        );
    }

    #[test]
    fn phrase_or2_on_table1() {
        let (pubs, ctx) = table1();
        let s: Vec<&Publication> = pubs.iter().collect();
        let plan = build_plan(&spec(3), &s, &scholar_profile(), &ctx).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.queries[0].query.disjuncts.len(), 2);
        assert_eq!(plan.queries[0].partitions, [0, 1]);
        assert_eq!(plan.queries[1].query.disjuncts.len(), 1);
        assert_eq!(plan.covered_by(1).collect::<Vec<_>>(), ["s3"]);
    }

    #[test]
    fn author_plan_on_table1() {
        let (pubs, ctx) = table1();
        let s: Vec<&Publication> = pubs.iter().collect();
        let plan = build_plan(&spec(5), &s, &scholar_profile(), &ctx).unwrap();
        let text: Vec<String> = plan.queries.iter().map(|q| q.query.to_string()).collect();
        assert_eq!(text, ["author:(keywords smith)", "author:(keywords taylor)"]);
    }

    #[test]
    fn fielded_naive_plan() {
        let (pubs, ctx) = table1();
        let plan = build_plan(&spec(4), &[&pubs[1]], &scholar_profile(), &ctx).unwrap();
        assert_eq!(
            plan.queries[0].query.to_string(),
            "author:(keywords williams) AND intitle:(keywords don't panic) AND year:(value \"2006\")"
        );
    }

    #[test]
    fn pair_anchors_use_only_anchored_attributes() {
        let pubs = [
            Publication::new("a", &["J. Smith"], "graph mining", 2001, "v"),
            Publication::new("b", &["J. Smith"], "graph search", 2001, "v"),
            Publication::new("c", &["K. Lee"], "text search", 2002, "v"),
        ];
        let ctx = TitleContext::from_titles(pubs.iter().map(|p| p.title.as_str()));
        let s: Vec<&Publication> = pubs.iter().collect();
        let plan = build_plan(&spec(7), &s, &scholar_profile(), &ctx).unwrap();
        assert_eq!(plan.queries[0].query.to_string(), "author:(keywords smith) AND intitle:(keywords graph)");
        let plan = build_plan(&spec(8), &s, &scholar_profile(), &ctx).unwrap();
        assert_eq!(plan.queries[0].query.to_string(), "free:(keywords smith) AND free:(keywords graph)");
        assert_eq!(plan.partitions.len(), 2);
    }

    #[test]
    fn capability_mismatches_are_named() {
        let (pubs, ctx) = table1();
        let s: Vec<&Publication> = pubs.iter().collect();
        let mut caps = scholar_profile();
        caps.predicates.retain(|p| p.name != "intitle");
        assert!(matches!(
            build_plan(&spec(1), &s, &caps, &ctx),
            Err(PlanError::UnknownPredicate { predicate }) if predicate == "intitle"
        ));
        let mut caps = scholar_profile();
        caps.predicates[0].accepts.remove(&ValueKind::Pattern);
        assert!(matches!(
            build_plan(&spec(9), &s, &caps, &ctx),
            Err(PlanError::UnsupportedKind { predicate, kind: ValueKind::Pattern }) if predicate == "intitle"
        ));
        let mut caps = scholar_profile();
        caps.max_disjuncts = 5;
        assert!(matches!(build_plan(&spec(10), &s, &caps, &ctx), Err(PlanError::Aggregation { .. })));
        caps.supports_or = false;
        caps.max_disjuncts = 1;
        assert!(matches!(build_plan(&spec(3), &s, &caps, &ctx), Err(PlanError::Aggregation { .. })));
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(1);
        s.value_gen.clear();
        assert!(matches!(s.validate(), Err(PlanError::InvalidSpec { field, .. }) if field == "value_gen.title"));
        let mut s = spec(3);
        s.aggregation = Aggregation::Or(1);
        assert!(s.validate().is_err());
        let mut s = spec(5);
        s.partitioning = Partitioning::FrequentValue {
            attributes: vec![Attribute::Title],
            min_support: 2,
            items_required: 1,
        };
        assert!(s.validate().is_err());
        let mut s = spec(9);
        s.value_gen.insert(Attribute::Title, ValueGen::GsAuthors);
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_roundtrip_and_errors() {
        for s in standard_catalog() {
            let text = s.to_toml_string();
            assert!(text.starts_with("format = \"qf-genspec-1\""));
            assert_eq!(GeneratorSpec::from_toml_str(&text).unwrap(), s);
        }
        let bad = spec(1).to_toml_string().replace("\"title\"", "\"isbn\"");
        assert!(matches!(
            GeneratorSpec::from_toml_str(&bad),
            Err(PlanError::InvalidSpec { field, .. }) if field.starts_with("mapping[0]")
        ));
        let bad = spec(3).to_toml_string().replace("or(2)", "and(2)");
        assert!(GeneratorSpec::from_toml_str(&bad).is_err());
    }

    #[test]
    fn shipped_catalog_matches_code() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../catalog/genspecs");
        let mut shipped = load_catalog_dir(dir).unwrap();
        shipped.sort_by_key(|s| s.id.parse::<usize>().unwrap());
        assert_eq!(shipped, standard_catalog());
    }

    #[test]
    fn plans_validate_and_cover() {
        let (pubs, ctx) = table1();
        let s: Vec<&Publication> = pubs.iter().collect();
        let caps = scholar_profile();
        for spec in standard_catalog() {
            let plan = build_plan(&spec, &s, &caps, &ctx).unwrap();
            for q in &plan.queries {
                validate(&q.query, &caps).unwrap();
            }
            let mut covered: Vec<&str> = (0..plan.len()).flat_map(|q| plan.covered_by(q)).collect();
            covered.sort();
            assert_eq!(covered, ["s1", "s2", "s3"], "generator {}", spec.id);
        }
    }
}
