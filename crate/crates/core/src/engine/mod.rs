//! The entity-search-engine simulator.
//!
//! Queries are validated against an [`EngineCapabilities`] profile and then
//! executed over an immutable [`EngineIndex`]. A basic query matches an entity
//! when the fraction of its terms the entity satisfies reaches the profile's
//! `soft_and_threshold`; a query matches when any disjunct does. Matches are
//! ranked by their best satisfied fraction, then by static rank, and served
//! in pages of `page_size` entities.

mod caps;
mod index;
mod query;

pub use caps::{
    scholar_profile, CapsError, EngineCapabilities, PredicateDescriptor, PredicateScope,
    CAPS_FORMAT,
};
pub use index::{pattern_matches, EngineIndex};
pub use query::{BasicQuery, ParseQueryError, PatternItem, Query, SearchValue, Term, ValueKind};

use std::cmp::Ordering;

use thiserror::Error;

use crate::corpus::Publication;
use index::{CompiledTerm, DocTokens};

/// Why a query is not acceptable for an engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("query has no disjuncts")]
    EmptyQuery,
    #[error("basic query has no terms")]
    EmptyBasicQuery,
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("predicate {predicate:?} does not accept {kind} values")]
    UnsupportedValueKind { predicate: String, kind: ValueKind },
    #[error("invalid value for {predicate:?}: {reason}")]
    InvalidValue {
        predicate: String,
        reason: &'static str,
    },
    #[error("OR aggregation is not supported")]
    OrNotSupported,
    #[error("{count} disjuncts exceed the limit of {max}")]
    TooManyDisjuncts { count: usize, max: usize },
}

/// Checks `query` against `caps`.
pub fn validate(query: &Query, caps: &EngineCapabilities) -> Result<(), Rejection> {
    if query.disjuncts.is_empty() {
        return Err(Rejection::EmptyQuery);
    }
    for basic in &query.disjuncts {
        if basic.terms.is_empty() {
            return Err(Rejection::EmptyBasicQuery);
        }
        for term in &basic.terms {
            let pred = caps
                .predicate(&term.predicate)
                .ok_or_else(|| Rejection::UnknownPredicate(term.predicate.clone()))?;
            let kind = term.value.kind();
            if !pred.accepts.contains(&kind) {
                return Err(Rejection::UnsupportedValueKind {
                    predicate: term.predicate.clone(),
                    kind,
                });
            }
            if let Some(reason) = term.value.defect() {
                return Err(Rejection::InvalidValue {
                    predicate: term.predicate.clone(),
                    reason,
                });
            }
        }
    }
    let count = query.disjuncts.len();
    if count > 1 && !caps.supports_or {
        return Err(Rejection::OrNotSupported);
    }
    if count > caps.max_disjuncts {
        return Err(Rejection::TooManyDisjuncts {
            count,
            max: caps.max_disjuncts,
        });
    }
    Ok(())
}

/// Whether `entity` satisfies one term under the given predicate.
pub fn term_matches(entity: &Publication, predicate: &PredicateDescriptor, value: &SearchValue) -> bool {
    CompiledTerm::new(predicate.scope, value).matches(&DocTokens::new(entity))
}

/// One page of results.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultPage<'a> {
    pub query_id: String,
    /// 1-based.
    pub page: usize,
    pub entities: Vec<&'a Publication>,
    pub has_next: bool,
}

/// The complete ranked match list of a query; pages are slices of it.
#[derive(Debug, Clone)]
pub struct RankedResults<'a> {
    index: &'a EngineIndex,
    query_id: String,
    positions: Vec<u32>,
    page_size: usize,
    max_pages: usize,
}

impl<'a> RankedResults<'a> {
    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    /// Number of matching entities, including those beyond `max_pages`.
    pub fn total_matches(&self) -> usize {
        self.positions.len()
    }

    /// Positions in the index, best first.
    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    /// Number of pages a client can fetch.
    pub fn reachable_pages(&self) -> usize {
        self.positions.len().div_ceil(self.page_size).min(self.max_pages)
    }

    pub fn page(&self, page: usize) -> ResultPage<'a> {
        let empty = ResultPage {
            query_id: self.query_id.clone(),
            page,
            entities: Vec::new(),
            has_next: false,
        };
        if page == 0 || page > self.max_pages {
            return empty;
        }
        let start = (page - 1).saturating_mul(self.page_size);
        if start >= self.positions.len() {
            return empty;
        }
        let end = (start + self.page_size).min(self.positions.len());
        ResultPage {
            query_id: self.query_id.clone(),
            page,
            entities: self.positions[start..end]
                .iter()
                .map(|&p| self.index.entity(p))
                .collect(),
            has_next: end < self.positions.len() && page < self.max_pages,
        }
    }
}

impl EngineIndex {
    /// Validates and runs `query`, returning the full ranked match list.
    pub fn search<'a>(
        &'a self,
        query: &Query,
        caps: &EngineCapabilities,
    ) -> Result<RankedResults<'a>, Rejection> {
        validate(query, caps)?;
        let threshold = caps.soft_and_threshold;
        // best satisfied fraction per entity as (satisfied, total)
        let mut best: Vec<(u32, u32)> = vec![(0, 1); self.len()];
        let mut matched: Vec<u32> = Vec::new();
        let mut counts: Vec<u32> = vec![0; self.len()];
        for basic in &query.disjuncts {
            let total = basic.terms.len() as u32;
            let mut touched: Vec<u32> = Vec::new();
            for term in &basic.terms {
                let pred = caps
                    .predicate(&term.predicate)
                    .expect("validated predicate");
                let compiled = CompiledTerm::new(pred.scope, &term.value);
                for pos in self.term_candidates(&compiled) {
                    if counts[pos as usize] == 0 {
                        touched.push(pos);
                    }
                    counts[pos as usize] += 1;
                }
            }
            for pos in touched {
                let sat = std::mem::take(&mut counts[pos as usize]);
                if f64::from(sat) / f64::from(total) + 1e-12 < threshold {
                    continue;
                }
                let slot = &mut best[pos as usize];
                if slot.0 == 0 {
                    matched.push(pos);
                }
                if u64::from(sat) * u64::from(slot.1) > u64::from(slot.0) * u64::from(total) {
                    *slot = (sat, total);
                }
            }
        }
        matched.sort_unstable_by(|&a, &b| {
            let (sa, ta) = best[a as usize];
            let (sb, tb) = best[b as usize];
            (u64::from(sb) * u64::from(ta))
                .cmp(&(u64::from(sa) * u64::from(tb)))
                .then_with(|| self.static_rank(a).cmp(&self.static_rank(b)))
                .then(Ordering::Equal)
        });
        Ok(RankedResults {
            index: self,
            query_id: query.id(),
            positions: matched,
            page_size: caps.page_size,
            max_pages: caps.max_pages,
        })
    }

    /// Runs `query` and returns page `page` (1-based). Pages past the end are
    /// empty with `has_next == false`.
    pub fn execute<'a>(
        &'a self,
        query: &Query,
        page: usize,
        caps: &EngineCapabilities,
    ) -> Result<ResultPage<'a>, Rejection> {
        Ok(self.search(query, caps)?.page(page))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example_publications;

    fn table1_index() -> EngineIndex {
        EngineIndex::from_publications(example_publications())
    }

    fn ids(page: &ResultPage<'_>) -> Vec<String> {
        page.entities.iter().map(|p| p.id.clone()).collect()
    }

    #[test]
    fn validate_examples() {
        let caps = scholar_profile();
        let ok: Query = BasicQuery::single("intitle", SearchValue::keywords(["question", "42"])).into();
        assert_eq!(validate(&ok, &caps), Ok(()));

        let mut amazon = caps.clone();
        for p in &mut amazon.predicates {
            p.accepts.remove(&ValueKind::Pattern);
        }
        let pat: Query = BasicQuery::single("intitle", SearchValue::pattern(["moma", "*", "object"])).into();
        assert_eq!(
            validate(&pat, &amazon),
            Err(Rejection::UnsupportedValueKind {
                predicate: "intitle".into(),
                kind: ValueKind::Pattern
            })
        );

        let many = Query::or((0..11).map(|i| BasicQuery::single("intitle", SearchValue::keywords([format!("w{i}")]))).collect());
        assert_eq!(
            validate(&many, &caps),
            Err(Rejection::TooManyDisjuncts { count: 11, max: 10 })
        );
        let unknown: Query = BasicQuery::single("isbn", SearchValue::value("1")).into();
        assert!(matches!(validate(&unknown, &caps), Err(Rejection::UnknownPredicate(_))));
        let mut no_or = caps.clone();
        no_or.supports_or = false;
        no_or.max_disjuncts = 1;
        let two = Query::or(vec![ok.disjuncts[0].clone(), ok.disjuncts[0].clone()]);
        assert_eq!(validate(&two, &no_or), Err(Rejection::OrNotSupported));
        assert_eq!(validate(&Query::or(vec![]), &caps), Err(Rejection::EmptyQuery));
        let bad: Query = BasicQuery::single("intitle", SearchValue::Keywords(vec![])).into();
        assert!(matches!(validate(&bad, &caps), Err(Rejection::InvalidValue { .. })));
    }

    #[test]
    fn term_examples() {
        let caps = scholar_profile();
        let intitle = caps.predicate("intitle").unwrap();
        let moma = Publication::new("m", &["A. Thor", "E. Rahm"], "MOMA – A Mapping-based Object Matching System", 2007, "CIDR");
        assert!(term_matches(&moma, intitle, &SearchValue::pattern(["MOMA", "*", "*", "*", "Object"])));
        let [s1, s2, _s3] = <[Publication; 3]>::try_from(example_publications()).unwrap();
        assert!(term_matches(&s2, intitle, &SearchValue::keywords(["don't", "panic"])));
        assert!(!term_matches(&s1, intitle, &SearchValue::phrase("question 43")));
        assert!(term_matches(&s1, intitle, &SearchValue::phrase("question to 42")));
        let year = caps.predicate("year").unwrap();
        assert!(term_matches(&s1, year, &SearchValue::value("2005")));
        assert!(!term_matches(&s1, year, &SearchValue::value("2006")));
        let free = caps.predicate("free").unwrap();
        assert!(term_matches(&s1, free, &SearchValue::keywords(["jones", "question", "2005"])));
        assert!(term_matches(&s1, free, &SearchValue::value("2005")));
    }

    #[test]
    fn author_query_on_table1() {
        let caps = scholar_profile();
        let index = table1_index();
        let q: Query = BasicQuery::single("author", SearchValue::keywords(["smith"])).into();
        let page = index.execute(&q, 1, &caps).unwrap();
        let mut got = ids(&page);
        got.sort();
        assert_eq!(got, ["s1", "s2"]);
        assert!(!page.has_next);
        assert_eq!(page, index.execute(&q, 1, &caps).unwrap());
    }

    #[test]
    fn pages_of_519() {
        let pubs: Vec<Publication> = (0..600)
            .map(|i| {
                let author = if i < 519 { "J. Prolific" } else { "K. Other" };
                Publication::new(format!("e{i}"), &[author], format!("paper number {i}"), 2000, "v")
            })
            .collect();
        let index = EngineIndex::from_publications(pubs);
        let caps = scholar_profile();
        let q: Query = BasicQuery::single("author", SearchValue::keywords(["prolific"])).into();
        let ranked = index.search(&q, &caps).unwrap();
        assert_eq!(ranked.total_matches(), 519);
        assert_eq!(ranked.reachable_pages(), 6);
        for p in 1..=5 {
            let page = ranked.page(p);
            assert_eq!(page.entities.len(), 100);
            assert!(page.has_next);
        }
        let last = ranked.page(6);
        assert_eq!(last.entities.len(), 19);
        assert!(!last.has_next);
        assert!(ranked.page(7).entities.is_empty());
        assert!(ranked.page(0).entities.is_empty());

        let mut capped = caps.clone();
        capped.max_pages = 3;
        let ranked = index.search(&q, &capped).unwrap();
        assert!(!ranked.page(3).has_next);
        assert!(ranked.page(4).entities.is_empty());
    }

    #[test]
    fn soft_and_ranks_full_matches_first() {
        let mut caps = scholar_profile();
        caps.soft_and_threshold = 0.5;
        let index = table1_index();
        let q: Query = BasicQuery::new(vec![
            Term::new("author", SearchValue::keywords(["smith"])),
            Term::new("intitle", SearchValue::keywords(["panic"])),
        ])
        .into();
        let page = index.execute(&q, 1, &caps).unwrap();
        assert_eq!(ids(&page), ["s2", "s1"]);
        caps.soft_and_threshold = 1.0;
        assert_eq!(ids(&index.execute(&q, 1, &caps).unwrap()), ["s2"]);
    }
}
