//! Synthetic bibliographic corpora.
//!
//! Author productivity is Zipf-like, title words follow a Zipf-like
//! vocabulary, and publications are grouped into venue volumes whose sizes
//! are skewed so that a few volumes are large. Titles are unique and no title
//! is a contiguous token run of another title.

use std::collections::{HashMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{Corpus, Publication};
use crate::seed;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub size: usize,
    /// Distinct authors in the pool per publication.
    pub authors_per_pub: f64,
    /// Zipf exponent of author productivity.
    pub author_exponent: f64,
    /// Expected publication count of the busiest author, as a fraction of the corpus size.
    pub max_author_share: f64,
    pub vocabulary: usize,
    pub word_exponent: f64,
    pub first_year: i32,
    pub last_year: i32,
}

impl SynthConfig {
    pub fn with_size(size: usize) -> Self {
        SynthConfig {
            size,
            authors_per_pub: 0.45,
            author_exponent: 0.75,
            max_author_share: 0.03,
            vocabulary: 2400,
            word_exponent: 0.9,
            first_year: 1980,
            last_year: 2008,
        }
    }
}

const AUTHORS_PER_PUB: [usize; 8] = [1, 2, 2, 3, 3, 3, 4, 5];
const AUTHOR_SLOTS_PER_PUB: f64 = 23.0 / 8.0;

const FIRST_NAMES: &[&str] = &[
    "Alice", "Andreas", "Anna", "Bernd", "Bob", "Carla", "Chen", "Daniel", "David", "Elena",
    "Erhard", "Eva", "Felix", "Fatima", "Georg", "Hannah", "Hiro", "Ines", "Ivan", "Jana",
    "Jens", "Julia", "Karl", "Kim", "Laura", "Lei", "Lukas", "Maria", "Mark", "Mei", "Nina",
    "Omar", "Olga", "Paul", "Petra", "Quentin", "Rahul", "Rosa", "Stefan", "Sara", "Tom",
    "Toru", "Ulla", "Victor", "Wei", "Xavier", "Yuki", "Zoe",
];

const SYLLABLES: &[&str] = &[
    "ba", "ber", "bra", "ca", "chen", "dan", "del", "dor", "el", "en", "fa", "fer", "gar",
    "gen", "han", "her", "ka", "kel", "kin", "la", "len", "lo", "man", "mar", "mer", "mo",
    "na", "nel", "ni", "no", "pa", "per", "ra", "ren", "ri", "ro", "sa", "sen", "son", "ta",
    "ter", "to", "va", "ver", "wa", "wen", "yo", "zen",
];

const WORDS: &[&str] = &[
    "data", "query", "queries", "database", "databases", "web", "search", "xml", "mining",
    "system", "systems", "efficient", "management", "semantic", "integration", "analysis",
    "model", "models", "processing", "information", "distributed", "approach", "learning",
    "framework", "evaluation", "algorithms", "optimization", "matching", "schema", "streams",
    "graph", "graphs", "index", "indexing", "retrieval", "mapping", "object", "clustering",
    "scalable", "adaptive", "parallel", "networks", "ontology", "services", "peer",
    "transactions", "storage", "views", "constraints", "similarity", "join", "joins",
    "ranking", "keyword", "spatial", "temporal", "probabilistic", "uncertain", "privacy",
    "workflow", "metadata", "caching", "sampling", "estimation", "cost", "sensor",
    "relational", "incremental", "dynamic", "engine", "engines", "entity",
    "entities", "duplicate", "detection", "record", "linkage", "text", "document",
    "documents", "collections", "mashups", "deep", "hidden", "interfaces", "crawling",
    "extraction", "wrapper", "patterns", "frequent", "itemsets", "rules", "association",
    "trees", "structures", "compression", "recovery", "logging", "consistency",
    "replication", "cloud", "grid", "mobile", "ad", "hoc", "aggregation", "top", "k",
    "skyline", "nearest", "neighbor", "high", "dimensional", "time", "series", "multimedia",
    "images", "video", "scientific", "biological", "genomic", "benchmark", "performance",
    "tuning", "physical", "design", "automatic", "interactive", "visual", "exploration",
    "warehouse", "olap", "cube", "cubes", "materialized", "provenance", "lineage",
    "quality", "cleaning", "fusion", "federated", "heterogeneous", "sources",
    "social", "community", "recommendation", "user", "users", "personalized", "context",
];

/// Generates a corpus of `config.size` publications.
pub fn generate_corpus(config: &SynthConfig, seed: u64) -> Corpus {
    let mut rng = seed::rng(seed::derive(seed, seed::stage::CORPUS));
    let size = config.size;

    let vocabulary = build_vocabulary(config.vocabulary.max(WORDS.len()), &mut rng);
    let word_weights = zipf_cumulative(vocabulary.len(), config.word_exponent);

    let n_authors = ((size as f64 * config.authors_per_pub).ceil() as usize).max(4);
    let authors = build_authors(n_authors, &mut rng);
    // about 2.9 author slots per publication
    let author_weights = capped_zipf_cumulative(
        n_authors,
        config.author_exponent,
        config.max_author_share / AUTHOR_SLOTS_PER_PUB,
    );

    let volumes = build_volumes(size, config, &mut rng);

    let mut titles: HashSet<Vec<String>> = HashSet::new();
    let mut publications = Vec::with_capacity(size);
    for (i, (venue, year)) in volumes.into_iter().enumerate() {
        let n_authors_here = *AUTHORS_PER_PUB.choose(&mut rng).unwrap();
        let mut names: Vec<String> = Vec::with_capacity(n_authors_here);
        while names.len() < n_authors_here.min(n_authors) {
            let a = &authors[sample_cumulative(&author_weights, &mut rng)];
            if !names.contains(a) {
                names.push(a.clone());
            }
        }
        let title = loop {
            let t = build_title(&vocabulary, &word_weights, &mut rng);
            if titles.insert(tokenize(&t)) {
                break t;
            }
        };
        publications.push(Publication {
            id: format!("p{i:06}"),
            authors: names,
            title,
            year,
            venue,
        });
    }
    remove_contained_titles(&mut publications, &mut titles, &vocabulary, &word_weights, &mut rng);
    Corpus::new(publications).expect("generated publications are valid")
}

fn build_vocabulary(n: usize, rng: &mut seed::Rng) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut words: Vec<String> = Vec::with_capacity(n);
    for w in WORDS {
        if seen.insert(w.to_string()) {
            words.push(w.to_string());
        }
    }
    let real = words.len().min(n);
    while words.len() < n {
        let parts = rng.random_range(2..=4);
        let w: String = (0..parts).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    // common real words first, invented ones in the tail
    let (head, tail) = words.split_at_mut(real);
    head.shuffle(rng);
    tail.shuffle(rng);
    words
}

fn build_authors(n: usize, rng: &mut seed::Rng) -> Vec<String> {
    let mut last_names: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let parts = rng.random_range(2..=3);
        let mut last: String = (0..parts).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
        if !last_names.insert(last.clone()) {
            continue;
        }
        last = capitalize(&last);
        let first = FIRST_NAMES.choose(rng).unwrap();
        out.push(format!("{first} {last}"));
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(h) => h.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Venue volumes: `(venue, year)` slots, one per publication. A handful of
/// large proceedings volumes, the rest small.
fn build_volumes(size: usize, config: &SynthConfig, rng: &mut seed::Rng) -> Vec<(String, i32)> {
    const VENUES: &[&str] = &[
        "VLDB", "SIGMOD Conference", "ICDE", "EDBT", "CIKM", "WWW", "KDD", "ICDM", "SIGIR",
        "PODS", "ICDT", "DASFAA", "ER", "WISE", "DEXA", "SSDBM", "TKDE", "VLDB Journal",
        "SIGMOD Record", "Information Systems", "Data Knowl. Eng.", "TODS", "IIWeb", "WebDB",
    ];
    let years: Vec<i32> = (config.first_year..=config.last_year).collect();
    // later years are busier
    let year_weights: Vec<f64> = {
        let mut acc = 0.0;
        (0..years.len())
            .map(|k| {
                acc += ((k + 1) as f64).powi(2);
                acc
            })
            .collect()
    };
    let n_big = (size / 1000).max(1);
    let mut slots = Vec::with_capacity(size);
    let mut used: HashSet<(usize, i32)> = HashSet::new();
    let mut big = 0;
    while slots.len() < size {
        let v = rng.random_range(0..VENUES.len());
        let y = years[sample_cumulative(&year_weights, rng)];
        if !used.insert((v, y)) {
            continue;
        }
        let n = if big < n_big {
            big += 1;
            rng.random_range(105..=140)
        } else {
            rng.random_range(4..=40)
        };
        for _ in 0..n.min(size - slots.len()) {
            slots.push((VENUES[v].to_string(), y));
        }
    }
    slots.shuffle(rng);
    slots
}

fn build_title(vocab: &[String], weights: &[f64], rng: &mut seed::Rng) -> String {
    const CONNECTORS: &[&str] = &["for", "of", "in", "on", "with", "and", "using", "over", "the", "a"];
    let n = rng.random_range(3..=7);
    let mut words: Vec<&str> = Vec::with_capacity(n + 3);
    for k in 0..n {
        if k > 0 && rng.random_bool(0.25) {
            words.push(CONNECTORS.choose(rng).unwrap());
        }
        let w = &vocab[sample_cumulative(weights, rng)];
        words.push(w);
    }
    if rng.random_bool(0.15) {
        words.insert(0, if rng.random_bool(0.5) { "A" } else { "The" });
    }
    let title = words.join(" ");
    match rng.random_range(0..10) {
        0 => format!("{}: {}", capitalize(&title), "A Survey"),
        1 => format!("{}.", capitalize(&title)),
        _ => capitalize(&title),
    }
}

/// Replaces titles whose token sequence occurs inside another title.
fn remove_contained_titles(
    pubs: &mut [Publication],
    titles: &mut HashSet<Vec<String>>,
    vocab: &[String],
    weights: &[f64],
    rng: &mut seed::Rng,
) {
    loop {
        let tokens: Vec<Vec<String>> = pubs.iter().map(|p| tokenize(&p.title)).collect();
        let mut postings: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            for w in t {
                let list = postings.entry(w.as_str()).or_default();
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
        }
        let contained: Vec<usize> = (0..pubs.len())
            .filter(|&i| {
                let t = &tokens[i];
                let rarest = t
                    .iter()
                    .min_by_key(|w| postings[w.as_str()].len())
                    .expect("titles are non-empty");
                postings[rarest.as_str()]
                    .iter()
                    .any(|&j| j != i && contains_run(&tokens[j], t))
            })
            .collect();
        if contained.is_empty() {
            return;
        }
        for i in contained {
            titles.remove(&tokens[i]);
            pubs[i].title = loop {
                let t = build_title(vocab, weights, rng);
                if titles.insert(tokenize(&t)) {
                    break t;
                }
            };
        }
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn zipf_cumulative(n: usize, exponent: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (1..=n)
        .map(|k| {
            acc += 1.0 / (k as f64).powf(exponent);
            acc
        })
        .collect()
}

/// Zipf weights with the head flattened so that no single entry takes more
/// than `max_share` of the total mass.
fn capped_zipf_cumulative(n: usize, exponent: f64, max_share: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|k| 1.0 / (k as f64).powf(exponent)).collect();
    let total: f64 = raw.iter().sum();
    let mut acc = 0.0;
    raw.iter()
        .map(|w| {
            acc += (w / total).min(max_share);
            acc
        })
        .collect()
}

fn sample_cumulative(cumulative: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let x = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_corpus(&SynthConfig::with_size(500), 7);
        let b = generate_corpus(&SynthConfig::with_size(500), 7);
        let c = generate_corpus(&SynthConfig::with_size(500), 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn titles_unique_and_not_contained() {
        let corpus = generate_corpus(&SynthConfig::with_size(2000), 1);
        let tokens: Vec<Vec<String>> = corpus.iter().map(|p| tokenize(&p.title)).collect();
        let distinct: HashSet<_> = tokens.iter().collect();
        assert_eq!(distinct.len(), tokens.len());
        // brute force over a sample
        for t in tokens.iter().take(200) {
            let hits = tokens.iter().filter(|o| contains_run(o, t)).count();
            assert_eq!(hits, 1);
        }
    }
}
