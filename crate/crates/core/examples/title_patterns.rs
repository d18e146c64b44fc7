//! Wildcard title patterns: as few literal words as needed to single out a
//! title among all corpus titles.

use qf::corpus::synth;
use qf::generators::{gen_pattern, TitleContext};

fn main() {
    let corpus = synth::generate_corpus(&synth::SynthConfig::with_size(5000), 11);
    let titles = TitleContext::new(&corpus);
    for p in corpus.iter().take(8) {
        let g = gen_pattern(&p.title, &titles);
        println!("{:<60} {}{}", p.title, g.value, g.flag.map(|f| format!("  [{f:?}]")).unwrap_or_default());
    }
}
