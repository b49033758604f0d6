use msa_core::algebra::{self, AlphabetPolicy};
use msa_core::{examples, Multiset, WeightedAutomaton};

use crate::failure::CliResult;

/// Prints the three worked automata and their weights on small multisets.
pub fn run() -> CliResult {
    let (m1, m2, m3) = (examples::m1(), examples::m2(), examples::m3());
    let product = algebra::shuffle(&m2, &m1, AlphabetPolicy::PadWithZeros)?;
    for (name, desc, m) in [
        ("M1", "unary strings whose length is a multiple of 3", &m1),
        ("M2", "exactly one b", &m2),
        ("M3", "a multiple of 3 a's and exactly one b", &m3),
    ] {
        println!("{name}: {desc}, {} states", m.dim());
        println!("{}", m.to_json()?);
        println!();
    }
    println!("weights (M2 ⧢ M1 is the shuffle product, built here):");
    println!("a's,b's,M1,M2,M3,M2 ⧢ M1");
    for b in 0..=2 {
        for a in 0..=6 {
            let w = Multiset::from_counts([("a", a), ("b", b)]);
            let m1_weight = if b == 0 { cell(&m1, &w)? } else { "-".into() };
            let m2_weight = if a == 0 { cell(&m2, &w)? } else { "-".into() };
            println!(
                "{a},{b},{m1_weight},{m2_weight},{},{}",
                cell(&m3, &w)?,
                cell(&product, &w)?
            );
        }
    }
    Ok(())
}

fn cell(m: &WeightedAutomaton, w: &Multiset) -> CliResult<String> {
    Ok(m.weight(w)?.re.to_string())
}
