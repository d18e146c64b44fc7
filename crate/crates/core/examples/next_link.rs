//! Is a "next" link worth following? Page precision samples under the
//! all-pages policy, and what a precision threshold saves.

use qf::corpus::{build_index, generate_datasets, synth, Category, NoiseProfile};
use qf::engine::scholar_profile;
use qf::evaluator::{run_experiment, ExperimentContext, FollowPolicy};
use qf::generators::standard_catalog;

fn main() {
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(4000), 5);
    let datasets = generate_datasets(&corpus, &[30], &Category::ALL, 2, 6).unwrap();
    let (index, provenance) = build_index(&corpus, &NoiseProfile::default().with_seed(7)).unwrap();
    let caps = scholar_profile();
    let specs = standard_catalog();

    for policy in [FollowPolicy::AllPages, FollowPolicy::PrecisionThreshold(0.15), FollowPolicy::FirstPageOnly] {
        let ctx = ExperimentContext::new(&corpus, &index, &provenance, &caps).with_policy(policy);
        let exp = run_experiment(&ctx, &datasets, &specs, None);
        let requests: usize = exp.cells.iter().map(|c| c.record.total_requests).sum();
        let coverage: f64 = exp
            .cells
            .iter()
            .filter_map(|c| c.measures.as_ref())
            .map(|m| m.coverage.value())
            .sum::<f64>()
            / exp.cells.len() as f64;
        println!("{policy:<28} {requests:>6} requests  mean coverage {coverage:.3}");

        if policy == FollowPolicy::AllPages {
            let summary = exp.next_link_summary();
            println!(
                "  {} pages, {:.1}% offered a next link, {} followed",
                summary.pages,
                100.0 * summary.next_link_fraction,
                summary.samples
            );
            for row in summary.cutoffs.iter().filter(|r| r.bin > 0) {
                println!(
                    "  page precision in [{:.2}, {:.2}): {:>4} samples, mean next-page precision {:.3}",
                    row.bin_low,
                    row.cutoff,
                    row.bin,
                    row.mean_next_bin.unwrap_or(0.0)
                );
            }
            println!("  suggested cutoff: {:?}", summary.recommended_cutoff(0.05));
        }
    }
}
