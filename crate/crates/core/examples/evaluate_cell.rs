//! One (dataset, generator) cell end to end: plan, execute, match, measure.

use qf::corpus::{build_index, generate_datasets, synth, Category, NoiseProfile};
use qf::engine::scholar_profile;
use qf::evaluator::ExperimentContext;
use qf::generators::standard_catalog;

fn main() {
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(3000), 1);
    let datasets = generate_datasets(&corpus, &[30], &[Category::Author], 1, 2).unwrap();
    let (index, provenance) = build_index(&corpus, &NoiseProfile::default().with_seed(3)).unwrap();
    let caps = scholar_profile();
    let ctx = ExperimentContext::new(&corpus, &index, &provenance, &caps);

    for spec in standard_catalog() {
        let cell = ctx.run_cell(&datasets[0], &spec);
        let Some(m) = &cell.measures else {
            println!("generator {:>2}: failed: {:?}", spec.id, cell.record.error);
            continue;
        };
        println!(
            "generator {:>2}: {:>3} queries {:>4} requests  coverage {}  recall {}  precision {}  efficiency {:.2}",
            spec.id,
            m.queries,
            m.total_requests,
            m.coverage,
            m.recall.map_or("undefined".to_string(), |r| r.to_string()),
            m.precision,
            m.efficiency_all.value(),
        );
        assert!(m.identities_hold());
    }
}
