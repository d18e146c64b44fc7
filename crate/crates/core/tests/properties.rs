//! Invariants of the engine and the evaluator over generated inputs.

use std::collections::BTreeSet;

use proptest::prelude::*;

use qf::corpus::{build_index, generate_datasets, synth, Category, NoiseProfile, Publication};
use qf::engine::{scholar_profile, term_matches, BasicQuery, EngineCapabilities, EngineIndex, Query, SearchValue, Term};
use qf::evaluator::{run_experiment, ExperimentContext, FollowPolicy};
use qf::generators::standard_catalog;

const WORDS: [&str; 6] = ["graph", "data", "query", "mining", "web", "stream"];
const NAMES: [&str; 4] = ["A. Smith", "B. Jones", "C. Taylor", "D. Brown"];

fn arb_pub(i: usize) -> impl Strategy<Value = Publication> {
    (
        prop::collection::vec(0..NAMES.len(), 1..3),
        prop::collection::vec(0..WORDS.len(), 1..5),
        1995..2000i32,
    )
        .prop_map(move |(authors, words, year)| {
            let names: Vec<&str> = authors.iter().map(|&a| NAMES[a]).collect();
            let title: Vec<&str> = words.iter().map(|&w| WORDS[w]).collect();
            Publication::new(format!("p{i:03}"), &names, title.join(" "), year, "v")
        })
}

fn arb_index() -> impl Strategy<Value = Vec<Publication>> {
    (1..60usize).prop_flat_map(|n| (0..n).map(arb_pub).collect::<Vec<_>>())
}

fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..WORDS.len()).prop_map(|w| Term::new("intitle", SearchValue::keywords([WORDS[w]]))),
        (0..WORDS.len(), 0..WORDS.len()).prop_map(|(a, b)| Term::new("intitle", SearchValue::phrase(format!("{} {}", WORDS[a], WORDS[b])))),
        (0..NAMES.len()).prop_map(|a| Term::new("author", SearchValue::keywords([NAMES[a].split(' ').nth(1).unwrap()]))),
        (1995..2000i32).prop_map(|y| Term::new("year", SearchValue::value(y.to_string()))),
    ]
}

fn arb_basic() -> impl Strategy<Value = BasicQuery> {
    prop::collection::vec(arb_term(), 1..3).prop_map(BasicQuery::new)
}

fn small_pages(page_size: usize) -> EngineCapabilities {
    let mut caps = scholar_profile();
    caps.page_size = page_size;
    caps.max_pages = 1000;
    caps
}

/// Every entity of a query, following next links to the end.
fn all_pages(index: &EngineIndex, query: &Query, caps: &EngineCapabilities) -> Vec<String> {
    let mut out = Vec::new();
    for page in 1.. {
        let p = index.execute(query, page, caps).expect("accepted");
        out.extend(p.entities.iter().map(|e| e.id.clone()));
        if !p.has_next {
            break;
        }
    }
    out
}

fn brute_force(pubs: &[Publication], q: &BasicQuery, caps: &EngineCapabilities) -> BTreeSet<String> {
    pubs.iter()
        .filter(|p| q.terms.iter().all(|t| term_matches(p, caps.predicate(&t.predicate).unwrap(), &t.value)))
        .map(|p| p.id.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pages_partition_the_ranked_list(pubs in arb_index(), q in arb_basic(), page_size in 1..7usize) {
        let caps = small_pages(page_size);
        let index = EngineIndex::from_publications(pubs);
        let query = Query::from(q);
        let ranked = index.search(&query, &caps).unwrap();
        let ids = all_pages(&index, &query, &caps);
        let expected: Vec<String> = ranked.positions().iter().map(|&p| index.entity(p).id.clone()).collect();
        prop_assert_eq!(&ids, &expected);
        prop_assert_eq!(ids.iter().collect::<BTreeSet<_>>().len(), ids.len());
        for page in 1..ranked.reachable_pages() {
            prop_assert_eq!(ranked.page(page).entities.len(), page_size);
        }
        let past = index.execute(&query, ranked.reachable_pages() + 1, &caps).unwrap();
        prop_assert!(past.entities.is_empty() && !past.has_next);
    }

    #[test]
    fn strict_and_equals_brute_force(pubs in arb_index(), q in arb_basic()) {
        let caps = small_pages(5);
        let index = EngineIndex::from_publications(pubs.clone());
        let got: BTreeSet<String> = all_pages(&index, &Query::from(q.clone()), &caps).into_iter().collect();
        prop_assert_eq!(got, brute_force(&pubs, &q, &caps));
    }

    #[test]
    fn or_is_union(pubs in arb_index(), a in arb_basic(), b in arb_basic()) {
        let caps = small_pages(4);
        let index = EngineIndex::from_publications(pubs);
        let set = |q: Query| all_pages(&index, &q, &caps).into_iter().collect::<BTreeSet<_>>();
        let union: BTreeSet<String> = set(Query::from(a.clone())).union(&set(Query::from(b.clone()))).cloned().collect();
        prop_assert_eq!(set(Query::or(vec![a, b])), union);
    }

    #[test]
    fn phrases_and_patterns_relax_monotonically(pubs in arb_index(), pick in 0..60usize) {
        let caps = small_pages(100);
        let index = EngineIndex::from_publications(pubs.clone());
        let title = &pubs[pick % pubs.len()].title;
        let words: Vec<&str> = title.split(' ').collect();
        let run = |v: SearchValue| all_pages(&index, &Query::from(BasicQuery::single("intitle", v)), &caps).into_iter().collect::<BTreeSet<_>>();
        let phrase = run(SearchValue::phrase(title.clone()));
        let keywords = run(SearchValue::keywords(words.iter().copied()));
        prop_assert!(phrase.is_subset(&keywords));
        let mut items: Vec<&str> = words.clone();
        if items.len() > 2 {
            items[1] = "*";
        }
        let pattern = run(SearchValue::pattern(items));
        prop_assert!(phrase.is_subset(&pattern));
        prop_assert!(phrase.contains(&pubs[pick % pubs.len()].id));
    }

    #[test]
    fn soft_and_only_adds_results(pubs in arb_index(), q in arb_basic()) {
        let strict = small_pages(10);
        let mut soft = strict.clone();
        soft.soft_and_threshold = 0.5;
        let index = EngineIndex::from_publications(pubs);
        let query = Query::from(q);
        let a: BTreeSet<String> = all_pages(&index, &query, &strict).into_iter().collect();
        let b = all_pages(&index, &query, &soft);
        prop_assert!(a.is_subset(&b.iter().cloned().collect()));
        // full matches rank ahead of partial ones
        let first_partial = b.iter().position(|id| !a.contains(id)).unwrap_or(b.len());
        prop_assert!(b[..first_partial].len() == a.len());
    }
}

#[test]
fn bounds_and_monotone_requests() {
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(2500), 4);
    let datasets = generate_datasets(&corpus, &[5, 30], &Category::ALL, 1, 4).unwrap();
    let specs = standard_catalog();
    let caps = scholar_profile();
    let (zero_index, zero_prov) = build_index(&corpus, &NoiseProfile::zero()).unwrap();
    let (index, prov) = build_index(&corpus, &NoiseProfile::default().with_seed(4)).unwrap();

    // zero noise: matches are exact, so recall never exceeds 1 and no match is false
    let ctx = ExperimentContext::new(&corpus, &zero_index, &zero_prov, &caps);
    for c in run_experiment(&ctx, &datasets, &specs, Some(2)).cells {
        let m = c.measures.expect("zero-noise cells succeed");
        assert!(m.range_size <= m.t_rel_size, "{}", c.record.run_id);
        assert!(c.mapping.pairs.iter().all(|p| p.s == p.t));
    }

    let run = |policy| {
        let ctx = ExperimentContext::new(&corpus, &index, &prov, &caps).with_policy(policy);
        run_experiment(&ctx, &datasets, &specs, Some(3))
    };
    let all = run(FollowPolicy::AllPages);
    let first = run(FollowPolicy::FirstPageOnly);
    for (a, f) in all.cells.iter().zip(&first.cells) {
        assert!(a.record.total_requests >= f.record.total_requests);
        let m = a.measures.as_ref().unwrap();
        for x in [m.coverage.value(), m.precision.value(), m.recall.map_or(0.0, |r| r.value())] {
            assert!((0.0..=1.0).contains(&x));
        }
        assert!(m.identities_hold());
        let f = f.measures.as_ref().unwrap();
        assert_eq!(f.efficiency_first, m.efficiency_first);
    }
    // scheduling does not change results
    let again = {
        let ctx = ExperimentContext::new(&corpus, &index, &prov, &caps);
        run_experiment(&ctx, &datasets, &specs, Some(1))
    };
    let strip = |e: &qf::evaluator::Experiment| e.cells.iter().map(|c| (c.measures.clone(), c.mapping.clone())).collect::<Vec<_>>();
    assert_eq!(strip(&all), strip(&again));
}
