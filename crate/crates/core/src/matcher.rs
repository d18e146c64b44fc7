//! Matching result entities back to input entities.
//!
//! A pair (s, t) is matched when its author, title and year similarities all
//! reach the configured thresholds. Many-to-many pairs are allowed, so one
//! input can match several duplicates in the results.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Publication;
use crate::text::{tokenize, PersonName};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    pub author_threshold: f64,
    pub title_threshold: f64,
    pub year_threshold: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            author_threshold: 0.5,
            title_threshold: 0.8,
            year_threshold: 1.0,
        }
    }
}

impl MatchConfig {
    /// Name of the first threshold outside [0,1], if any.
    pub fn invalid_field(&self) -> Option<&'static str> {
        let ok = |x: f64| (0.0..=1.0).contains(&x);
        if !ok(self.author_threshold) {
            Some("author_threshold")
        } else if !ok(self.title_threshold) {
            Some("title_threshold")
        } else if !ok(self.year_threshold) {
            Some("year_threshold")
        } else {
            None
        }
    }
}

/// `(10 - min(|y1 - y2|, 10)) / 10`.
pub fn year_sim(y1: i32, y2: i32) -> f64 {
    let d = (y1 - y2).unsigned_abs().min(10);
    f64::from(10 - d) / 10.0
}

/// Size of a maximum one-to-one agreement matching between the name lists,
/// divided by the longer list.
pub fn author_sim<S: AsRef<str>, T: AsRef<str>>(a1: &[S], a2: &[T]) -> f64 {
    let n1: Vec<PersonName> = a1.iter().map(|a| PersonName::parse(a.as_ref())).collect();
    let n2: Vec<PersonName> = a2.iter().map(|a| PersonName::parse(a.as_ref())).collect();
    author_sim_parsed(&n1, &n2)
}

fn author_sim_parsed(n1: &[PersonName], n2: &[PersonName]) -> f64 {
    let longest = n1.len().max(n2.len());
    if longest == 0 {
        return 0.0;
    }
    let adjacency: Vec<Vec<usize>> = n1
        .iter()
        .map(|a| (0..n2.len()).filter(|&j| a.agrees(&n2[j])).collect())
        .collect();
    maximum_matching(&adjacency, n2.len()) as f64 / longest as f64
}

/// Kuhn's augmenting-path bipartite matching.
fn maximum_matching(adjacency: &[Vec<usize>], right: usize) -> usize {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    let mut size = 0;
    for u in 0..adjacency.len() {
        let mut seen = vec![false; right];
        if augment(u, adjacency, &mut seen, &mut owner) {
            size += 1;
        }
    }
    size
}

/// Character trigram multiset of the normalized token stream. Strings
/// shorter than three characters form a single gram.
pub fn trigrams(text: &str) -> BTreeMap<String, usize> {
    let chars: Vec<char> = tokenize(text).join(" ").chars().collect();
    let mut grams = BTreeMap::new();
    if chars.is_empty() {
        return grams;
    }
    if chars.len() < 3 {
        grams.insert(chars.iter().collect(), 1);
        return grams;
    }
    for w in chars.windows(3) {
        *grams.entry(w.iter().collect()).or_insert(0) += 1;
    }
    grams
}

fn dice(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    let total: usize = a.values().sum::<usize>() + b.values().sum::<usize>();
    if total == 0 {
        return 0.0;
    }
    let shared: usize = a
        .iter()
        .map(|(g, &c)| b.get(g).map_or(0, |&d| c.min(d)))
        .sum();
    2.0 * shared as f64 / total as f64
}

/// Dice coefficient over character trigram multisets.
pub fn title_sim(t1: &str, t2: &str) -> f64 {
    dice(&trigrams(t1), &trigrams(t2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub s: String,
    pub t: String,
    pub author_sim: f64,
    pub title_sim: f64,
    pub year_sim: f64,
}

/// The mapping between input and result entities, ordered by (s, t).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchMapping {
    pub pairs: Vec<MatchPair>,
}

impl MatchMapping {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Input ids with at least one match.
    pub fn domain(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|p| p.s.as_str()).collect()
    }

    /// Result ids with at least one match.
    pub fn range(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|p| p.t.as_str()).collect()
    }

    /// Pairs whose result id is in `keep`.
    pub fn restricted_to(&self, keep: &BTreeSet<&str>) -> MatchMapping {
        MatchMapping {
            pairs: self
                .pairs
                .iter()
                .filter(|p| keep.contains(p.t.as_str()))
                .cloned()
                .collect(),
        }
    }
}

struct Prepared<'a> {
    p: &'a Publication,
    names: Vec<PersonName>,
    grams: BTreeMap<String, usize>,
}

impl<'a> Prepared<'a> {
    fn new(p: &'a Publication) -> Self {
        Prepared {
            p,
            names: p.authors.iter().map(|a| PersonName::parse(a)).collect(),
            grams: trigrams(&p.title),
        }
    }
}

fn prepare<'a>(side: &[&'a Publication]) -> Vec<Prepared<'a>> {
    let mut seen = BTreeSet::new();
    side.iter()
        .filter(|p| seen.insert(p.id.as_str()))
        .map(|p| Prepared::new(p))
        .collect()
}

/// Every pair of `inputs` × `results` meeting all three thresholds.
///
/// Results are bucketed by year so only pairs that can reach the year
/// threshold are scored. Duplicate ids on either side are scored once.
pub fn match_entities(inputs: &[&Publication], results: &[&Publication], config: &MatchConfig) -> MatchMapping {
    let inputs = prepare(inputs);
    let results = prepare(results);
    let mut by_year: HashMap<i32, Vec<usize>> = HashMap::new();
    for (i, r) in results.iter().enumerate() {
        by_year.entry(r.p.year).or_default().push(i);
    }
    // largest year distance still meeting the threshold
    let max_delta = (0..=10).rev().find(|&d| year_sim(0, d) >= config.year_threshold);
    let mut pairs = Vec::new();
    if let Some(max_delta) = max_delta {
        let unlimited = max_delta == 10;
        for s in &inputs {
            let candidates: Vec<usize> = if unlimited {
                (0..results.len()).collect()
            } else {
                (-max_delta..=max_delta)
                    .filter_map(|d| by_year.get(&(s.p.year + d)))
                    .flatten()
                    .copied()
                    .collect()
            };
            for i in candidates {
                let t = &results[i];
                let ys = year_sim(s.p.year, t.p.year);
                if ys < config.year_threshold {
                    continue;
                }
                let a = author_sim_parsed(&s.names, &t.names);
                if a < config.author_threshold {
                    continue;
                }
                let ts = dice(&s.grams, &t.grams);
                if ts < config.title_threshold {
                    continue;
                }
                pairs.push(MatchPair {
                    s: s.p.id.clone(),
                    t: t.p.id.clone(),
                    author_sim: a,
                    title_sim: ts,
                    year_sim: ys,
                });
            }
        }
    }
    pairs.sort_by(|a, b| (&a.s, &a.t).cmp(&(&b.s, &b.t)));
    MatchMapping { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example_publications;
    use proptest::prelude::*;

    #[test]
    fn year_examples() {
        assert_eq!(year_sim(2005, 2005), 1.0);
        assert_eq!(year_sim(1990, 2005), 0.0);
        assert_eq!(year_sim(2000, 2003), 0.7);
        assert_eq!(year_sim(2003, 2000), 0.7);
        assert_eq!(year_sim(2005, 2006), 0.9);
    }

    #[test]
    fn author_examples() {
        assert_eq!(author_sim(&["Smith", "Jones"], &["Smith", "Jones"]), 1.0);
        assert_eq!(author_sim(&["Williams", "Smith"], &["Smith"]), 0.5);
        assert_eq!(author_sim(&["J. Smith"], &["K. Smith"]), 0.0);
        assert_eq!(author_sim(&["J. Smith"], &["John Smith"]), 1.0);
        assert_eq!(author_sim(&["Smith"], &["K. Smith"]), 1.0);
        assert_eq!(author_sim(&["Jones", "Smith"], &["Smith", "Jones"]), 1.0);
        // one Smith cannot be matched twice
        assert_eq!(author_sim(&["Smith", "Smith"], &["J. Smith", "Lee"]), 0.5);
    }

    #[test]
    fn matching_finds_maximum_not_greedy() {
        // greedy left-to-right would pair a0-b0 and strand a1
        let adj = vec![vec![0, 1], vec![0]];
        assert_eq!(maximum_matching(&adj, 2), 2);
    }

    /// Dice over trigrams computed by independent string slicing.
    fn dice_oracle(a: &str, b: &str) -> f64 {
        fn grams(s: &str) -> Vec<String> {
            let norm: String = s
                .to_lowercase()
                .split(|c: char| !(c.is_alphanumeric() || c == '\''))
                .map(|w| w.trim_matches('\''))
                .filter(|w| !w.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            let c: Vec<char> = norm.chars().collect();
            if c.len() < 3 {
                return vec![norm];
            }
            (0..c.len() - 2).map(|i| c[i..i + 3].iter().collect()).collect()
        }
        let (ga, mut gb) = (grams(a), grams(b));
        let total = ga.len() + gb.len();
        let mut shared = 0;
        for g in &ga {
            if let Some(pos) = gb.iter().position(|x| x == g) {
                gb.remove(pos);
                shared += 1;
            }
        }
        2.0 * shared as f64 / total as f64
    }

    #[test]
    fn title_examples() {
        assert_eq!(title_sim("Don't Panic!", "don't panic"), 1.0);
        let unrelated = title_sim("The question to 42", "completely unrelated words");
        assert!(unrelated < 0.8);
        assert_eq!(unrelated, dice_oracle("The question to 42", "completely unrelated words"));
        let typo = title_sim("Mapping based object matching", "Mapping based objct matching");
        assert!(typo >= 0.8, "{typo}");
        assert_eq!(typo, dice_oracle("Mapping based object matching", "Mapping based objct matching"));
    }

    #[test]
    fn table1_copies() {
        let s = example_publications();
        let refs: Vec<&Publication> = s.iter().collect();
        let m = match_entities(&refs, &refs, &MatchConfig::default());
        let ids: Vec<(&str, &str)> = m.pairs.iter().map(|p| (p.s.as_str(), p.t.as_str())).collect();
        assert_eq!(ids, [("s1", "s1"), ("s2", "s2"), ("s3", "s3")]);

        let mut shifted = s[0].clone();
        shifted.id = "t1".into();
        shifted.year += 1;
        assert!(match_entities(&refs, &[&shifted], &MatchConfig::default()).is_empty());
        assert!(match_entities(&refs, &[], &MatchConfig::default()).is_empty());
    }

    fn arb_pub(id: usize) -> impl Strategy<Value = Publication> {
        let name = prop::sample::select(vec!["J. Smith", "K. Smith", "Smith", "A. Jones", "Lee"]);
        let word = prop::sample::select(vec!["graph", "grap", "mining", "data", "base", "bases"]);
        (
            prop::collection::vec(name, 1..3),
            prop::collection::vec(word, 1..4),
            1995..2000i32,
        )
            .prop_map(move |(authors, words, year)| {
                Publication::new(format!("p{id}"), &authors, words.join(" "), year, "v")
            })
    }

    proptest! {
        #[test]
        fn similarities_are_symmetric_and_bounded(a in arb_pub(0), b in arb_pub(1)) {
            for (x, y) in [
                (author_sim(&a.authors, &b.authors), author_sim(&b.authors, &a.authors)),
                (title_sim(&a.title, &b.title), title_sim(&b.title, &a.title)),
                (year_sim(a.year, b.year), year_sim(b.year, a.year)),
            ] {
                prop_assert_eq!(x, y);
                prop_assert!((0.0..=1.0).contains(&x));
            }
            prop_assert_eq!(title_sim(&a.title, &a.title), 1.0);
            prop_assert_eq!(author_sim(&a.authors, &a.authors), 1.0);
            prop_assert_eq!(year_sim(a.year, b.year) >= 1.0, a.year == b.year);
        }

        #[test]
        fn mapping_equals_brute_force(
            s in prop::collection::vec(arb_pub(0), 1..5),
            t in prop::collection::vec(arb_pub(0), 0..6),
            year_threshold in prop::sample::select(vec![0.0, 0.8, 1.0]),
        ) {
            let s: Vec<Publication> = s.into_iter().enumerate().map(|(i, mut p)| { p.id = format!("s{i}"); p }).collect();
            let t: Vec<Publication> = t.into_iter().enumerate().map(|(i, mut p)| { p.id = format!("t{i}"); p }).collect();
            let config = MatchConfig { year_threshold, ..MatchConfig::default() };
            let sr: Vec<&Publication> = s.iter().collect();
            let tr: Vec<&Publication> = t.iter().collect();
            let got: Vec<(String, String)> = match_entities(&sr, &tr, &config).pairs.into_iter().map(|p| (p.s, p.t)).collect();
            let mut expected = Vec::new();
            for a in &s {
                for b in &t {
                    if author_sim(&a.authors, &b.authors) >= 0.5
                        && dice_oracle(&a.title, &b.title) >= 0.8
                        && year_sim(a.year, b.year) >= year_threshold
                    {
                        expected.push((a.id.clone(), b.id.clone()));
                    }
                }
            }
            expected.sort();
            prop_assert_eq!(got, expected);
        }
    }
}
