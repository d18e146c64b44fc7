//! Querying the simulated engine: textual queries, OR aggregation,
//! pagination and capability checks.

use qf::corpus::{example_publications, Publication};
use qf::engine::{scholar_profile, EngineCapabilities, EngineIndex, Query};

fn main() {
    let index = EngineIndex::from_publications(example_publications());
    let caps = scholar_profile();

    for text in [
        "author:(keywords smith)",
        "intitle:(phrase \"don't panic\")",
        "intitle:(keywords question 42) OR intitle:(keywords hitchhiker's galaxy)",
        "intitle:(pattern the * to *)",
    ] {
        let query: Query = text.parse().expect("query syntax");
        let page = index.execute(&query, 1, &caps).expect("accepted");
        let ids: Vec<&str> = page.entities.iter().map(|p| p.id.as_str()).collect();
        println!("{query}  ->  {ids:?}");
    }

    // 519 matches at 100 per page: six requests, the last one holding 19.
    let big: Vec<Publication> = (0..519)
        .map(|i| Publication::new(format!("p{i}"), &["A. Author"], format!("paper {i}"), 2000, "v"))
        .collect();
    let index = EngineIndex::from_publications(big);
    let query: Query = "author:(keywords author)".parse().unwrap();
    let results = index.search(&query, &caps).unwrap();
    for n in 1..=results.reachable_pages() {
        let page = results.page(n);
        println!("page {n}: {} entities, next link: {}", page.entities.len(), page.has_next);
    }

    // A book store caps file has no wildcard patterns.
    let store = EngineCapabilities::from_toml_str(include_str!("../../../catalog/caps/amazon-books.toml")).unwrap();
    let pattern: Query = "title:(pattern the * to *)".parse().unwrap();
    match index.search(&pattern, &store) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("{} rejects it: {e}", store.id),
    }
}
