//! The three fictional publications: a per-entity title generator and a
//! frequent-author generator, with and without OR aggregation.

use qf::corpus::{example_publications, Publication};
use qf::engine::scholar_profile;
use qf::generators::{build_plan, standard_catalog, GeneratorSpec, TitleContext};

const TITLE_KEYWORDS: &str = r#"
format = "qf-genspec-1"
id = "title-keywords"
aggregation = "none"
[partitioning]
strategy = "naive"
[[mapping]]
attribute = "title"
predicate = "intitle"
[value_gen]
title = "keywords:default"
"#;

const FREQUENT_AUTHOR: &str = r#"
format = "qf-genspec-1"
id = "frequent-author"
aggregation = "none"
[partitioning]
strategy = "frequent-value"
attributes = ["authors"]
min_support = 2
items_required = 1
[[mapping]]
attribute = "authors"
predicate = "author"
[value_gen]
authors = "gs_authors"
"#;

fn show(spec: &GeneratorSpec, entities: &[&Publication], titles: &TitleContext) {
    let plan = build_plan(spec, entities, &scholar_profile(), titles).expect("plan");
    println!("generator {}:", spec.id);
    for (i, q) in plan.queries.iter().enumerate() {
        let covers: Vec<&str> = plan.covered_by(i).collect();
        println!("  {}    covers {covers:?}", q.query);
    }
}

fn main() {
    let pubs = example_publications();
    let entities: Vec<&Publication> = pubs.iter().collect();
    let titles = TitleContext::from_titles(pubs.iter().map(|p| p.title.as_str()));

    show(&GeneratorSpec::from_toml_str(TITLE_KEYWORDS).unwrap(), &entities, &titles);
    show(&GeneratorSpec::from_toml_str(FREQUENT_AUTHOR).unwrap(), &entities, &titles);

    // Catalog generator 3 ORs pairs of title queries together.
    let catalog = standard_catalog();
    show(&catalog[2], &entities, &titles);
}
