//! Synthetic corpus, category-constrained datasets and the noisy index.

use std::collections::BTreeMap;

use qf::corpus::{build_index, generate_datasets, synth, Category, NoiseProfile};

fn main() {
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(5000), 42);
    let mut per_author: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &corpus {
        for a in &p.authors {
            *per_author.entry(a).or_default() += 1;
        }
    }
    let mut busiest: Vec<(&str, usize)> = per_author.into_iter().collect();
    busiest.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
    println!("{} publications, {} authors; busiest: {:?}", corpus.len(), busiest.len(), &busiest[..3]);

    let datasets = generate_datasets(&corpus, &[5, 30, 100], &Category::ALL, 5, 7).unwrap();
    println!("{} datasets", datasets.len());
    for d in datasets.iter().step_by(15) {
        let first = corpus.get(&d.members[0]).unwrap();
        println!("  {} ({} members), e.g. {first}", d.id, d.size);
    }

    for (name, profile) in [("zero", NoiseProfile::zero()), ("default", NoiseProfile::default().with_seed(9))] {
        let (index, provenance) = build_index(&corpus, &profile).unwrap();
        println!(
            "{name} noise: {} index entities, {} distractors",
            index.len(),
            provenance.distractor_count()
        );
    }
}
