//! Partitioning strategies: one singleton per entity, or groups sharing
//! frequent attribute values mined Apriori-style.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::corpus::{Attribute, Publication};
use crate::text::{normalize_name, Stopwords};

/// One attribute value used as a mining item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub attribute: Attribute,
    /// Normalized full name for authors, a content token for titles, the
    /// year as text, or the normalized venue.
    pub value: String,
}

impl Item {
    pub fn new(attribute: Attribute, value: impl Into<String>) -> Self {
        Item {
            attribute,
            value: value.into(),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

/// A subset of the input set that receives one basic query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Member ids in input order.
    pub members: Vec<String>,
    /// Frequent items shared by all members; empty for singletons.
    pub anchor: Vec<Item>,
}

pub fn partition_naive(entities: &[&Publication]) -> Vec<Partition> {
    entities
        .iter()
        .map(|p| Partition {
            members: vec![p.id.clone()],
            anchor: Vec::new(),
        })
        .collect()
}

/// Items of one publication restricted to `attributes`.
pub fn items_of(p: &Publication, attributes: &[Attribute], stopwords: &Stopwords) -> BTreeSet<Item> {
    let mut items = BTreeSet::new();
    for &attribute in attributes {
        match attribute {
            Attribute::Authors => {
                for a in &p.authors {
                    let n = normalize_name(a);
                    if !n.is_empty() {
                        items.insert(Item::new(attribute, n));
                    }
                }
            }
            Attribute::Title => {
                for t in stopwords.content_tokens(&p.title) {
                    items.insert(Item::new(attribute, t));
                }
            }
            Attribute::Year => {
                items.insert(Item::new(attribute, p.year.to_string()));
            }
            Attribute::Venue => {
                let v = normalize_name(&p.venue);
                if !v.is_empty() {
                    items.insert(Item::new(attribute, v));
                }
            }
        }
    }
    items
}

/// Frequent itemsets of exactly `size` items over `transactions`, with their
/// support. Classic level-wise candidate generation with subset pruning.
/// Items are dense ids whose order matches the item order.
fn frequent_itemsets(
    transactions: &[Vec<u32>],
    size: usize,
    min_support: usize,
) -> Vec<(Vec<u32>, usize)> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for t in transactions {
        for &i in t {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_support)
        .map(|(i, c)| (vec![i], c))
        .collect();
    for k in 2..=size {
        if level.is_empty() {
            break;
        }
        let previous: BTreeSet<&[u32]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let mut candidates: Vec<Vec<u32>> = Vec::new();
        for (a, (sa, _)) in level.iter().enumerate() {
            for (sb, _) in &level[a + 1..] {
                if sa[..k - 2] != sb[..k - 2] {
                    break;
                }
                let mut c = sa.clone();
                c.push(sb[k - 2]);
                let all_subsets_frequent = (0..c.len()).all(|skip| {
                    let sub: Vec<u32> = c
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    previous.contains(sub.as_slice())
                });
                if all_subsets_frequent {
                    candidates.push(c);
                }
            }
        }
        let mut next = Vec::new();
        for c in candidates {
            let support = transactions
                .iter()
                .filter(|t| c.iter().all(|i| t.binary_search(i).is_ok()))
                .count();
            if support >= min_support {
                next.push((c, support));
            }
        }
        level = next;
    }
    if size == 0 {
        return Vec::new();
    }
    level.retain(|(s, _)| s.len() == size);
    level
}

/// Greedy frequent-value partitioning.
///
/// Repeatedly mines the not-yet-covered entities for the itemset of
/// `items_required` items with the highest support (ties: lexicographically
/// smallest item sequence), turns its supporters into one anchored partition
/// and continues until no itemset reaches `min_support`. Leftovers become
/// unanchored singletons.
pub fn partition_frequent_value(
    entities: &[&Publication],
    attributes: &[Attribute],
    min_support: usize,
    items_required: usize,
    stopwords: &Stopwords,
) -> Vec<Partition> {
    let per_entity: Vec<BTreeSet<Item>> = entities
        .iter()
        .map(|p| items_of(p, attributes, stopwords))
        .collect();
    let universe: BTreeSet<&Item> = per_entity.iter().flatten().collect();
    let ids: HashMap<&Item, u32> = universe
        .iter()
        .enumerate()
        .map(|(i, item)| (*item, i as u32))
        .collect();
    let items: Vec<&Item> = universe.into_iter().collect();
    let transactions: Vec<Vec<u32>> = per_entity
        .iter()
        .map(|set| set.iter().map(|i| ids[i]).collect())
        .collect();

    let mut uncovered: Vec<usize> = (0..entities.len()).collect();
    let mut partitions = Vec::new();
    while min_support >= 1 && items_required >= 1 && uncovered.len() >= min_support {
        let current: Vec<Vec<u32>> = uncovered.iter().map(|&i| transactions[i].clone()).collect();
        let best = frequent_itemsets(&current, items_required, min_support)
            .into_iter()
            .max_by(|(a, sa), (b, sb)| sa.cmp(sb).then_with(|| b.cmp(a)));
        let Some((itemset, _)) = best else {
            break;
        };
        let (members, rest): (Vec<usize>, Vec<usize>) = uncovered
            .iter()
            .partition(|&&i| itemset.iter().all(|x| transactions[i].binary_search(x).is_ok()));
        partitions.push(Partition {
            members: members.iter().map(|&i| entities[i].id.clone()).collect(),
            anchor: itemset.iter().map(|&x| items[x as usize].clone()).collect(),
        });
        uncovered = rest;
    }
    partitions.extend(uncovered.into_iter().map(|i| Partition {
        members: vec![entities[i].id.clone()],
        anchor: Vec::new(),
    }));
    partitions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::example_publications;

    fn refs(p: &[Publication]) -> Vec<&Publication> {
        p.iter().collect()
    }

    #[test]
    fn naive_is_singletons_in_order() {
        let pubs = example_publications();
        let parts = partition_naive(&refs(&pubs));
        let members: Vec<_> = parts.iter().map(|p| p.members.clone()).collect();
        assert_eq!(members, [vec!["s1"], vec!["s2"], vec!["s3"]]);
        assert!(parts.iter().all(|p| p.anchor.is_empty()));
        assert_eq!(partition_naive(&refs(&pubs[..1])).len(), 1);
    }

    #[test]
    fn frequent_author_on_table1() {
        let pubs = example_publications();
        let parts = partition_frequent_value(&refs(&pubs), &[Attribute::Authors], 2, 1, Stopwords::default_list());
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].members, ["s1", "s2"]);
        assert_eq!(parts[0].anchor, [Item::new(Attribute::Authors, "smith")]);
        assert_eq!(parts[1].members, ["s3"]);
        assert!(parts[1].anchor.is_empty());
    }

    #[test]
    fn unreachable_support_gives_singletons() {
        let pubs = example_publications();
        let parts = partition_frequent_value(&refs(&pubs), &[Attribute::Authors], 4, 1, Stopwords::default_list());
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|p| p.anchor.is_empty() && p.members.len() == 1));
    }

    #[test]
    fn highest_support_wins_then_covered_entities_leave() {
        let titles = [
            "graph mining basics",
            "graph mining at scale",
            "graph mining for fun",
            "graph layouts",
        ];
        let pubs: Vec<Publication> = titles
            .iter()
            .enumerate()
            .map(|(i, t)| Publication::new(format!("g{i}"), &[&format!("Author{i}")], *t, 2000, "v"))
            .collect();
        let parts = partition_frequent_value(&refs(&pubs), &[Attribute::Title], 3, 1, Stopwords::default_list());
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].members.len(), 4);
        assert_eq!(parts[0].anchor, [Item::new(Attribute::Title, "graph")]);
    }

    #[test]
    fn pairs_over_pooled_attributes() {
        let pubs = vec![
            Publication::new("a", &["J. Smith"], "graph mining", 2001, "v"),
            Publication::new("b", &["J. Smith"], "graph search", 2001, "v"),
            Publication::new("c", &["J. Smith"], "text search", 2002, "v"),
        ];
        let attrs = [Attribute::Authors, Attribute::Title, Attribute::Year];
        let parts = partition_frequent_value(&refs(&pubs), &attrs, 2, 2, Stopwords::default_list());
        // {smith, graph}, {smith, 2001} and {smith, search} all have support 2;
        // the smallest sequence is (authors=j smith, title=graph)
        assert_eq!(parts[0].members, ["a", "b"]);
        assert_eq!(
            parts[0].anchor,
            [Item::new(Attribute::Authors, "j smith"), Item::new(Attribute::Title, "graph")]
        );
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn apriori_matches_enumeration() {
        // brute force over all pairs
        let tx: Vec<Vec<u32>> = vec![vec![0, 1, 2], vec![0, 1], vec![1, 2, 3], vec![0, 2, 3], vec![1, 3]];
        let got = frequent_itemsets(&tx, 2, 2);
        let mut expected = Vec::new();
        for a in 0..4u32 {
            for b in a + 1..4 {
                let s = tx.iter().filter(|t| t.contains(&a) && t.contains(&b)).count();
                if s >= 2 {
                    expected.push((vec![a, b], s));
                }
            }
        }
        assert_eq!(got, expected);
        let triples = frequent_itemsets(&tx, 3, 1);
        assert!(triples.iter().all(|(s, _)| s.len() == 3));
        assert_eq!(triples.len(), 3);
    }
}
