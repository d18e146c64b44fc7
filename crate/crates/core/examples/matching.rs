//! The similarity functions behind the entity matcher.

use qf::corpus::Publication;
use qf::matcher::{author_sim, match_entities, title_sim, year_sim, MatchConfig};

fn main() {
    for delta in [0, 1, 3, 10, 25] {
        println!("year delta {delta:>2}: {}", year_sim(2000, 2000 + delta));
    }
    println!(
        "authors: {:.3}",
        author_sim(&["Andreas Thor", "Erhard Rahm"], &["A. Thor", "E. Rahm", "D. Aumueller"])
    );
    println!(
        "titles:  {:.3}",
        title_sim("MOMA - A Mapping-based Object Matching System", "MOMA: a mapping based object matching sytem")
    );

    let input = Publication::new("s1", &["Andreas Thor", "Erhard Rahm"], "MOMA - A Mapping-based Object Matching System", 2007, "CIDR");
    let found = [
        Publication::new("t1", &["A. Thor", "E. Rahm"], "MOMA: a mapping based object matching sytem", 2007, "CIDR 2007"),
        Publication::new("t2", &["A. Thor", "E. Rahm"], "MOMA: a mapping based object matching system", 2006, "CIDR"),
        Publication::new("t3", &["J. Smith"], "Object matching in practice", 2007, "VLDB"),
    ];
    let results: Vec<&Publication> = found.iter().collect();
    let m = match_entities(&[&input], &results, &MatchConfig::default());
    for pair in &m.pairs {
        println!("{} ~ {}  (authors {:.2}, title {:.2}, year {:.1})", pair.s, pair.t, pair.author_sim, pair.title_sim, pair.year_sim);
    }
}
