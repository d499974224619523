//! Benchmark inputs shared by the criterion targets.

use toric_ech::numeric::NegativeWeightExpansion;

/// The expansions the benchmarks sweep over.
pub const CASES: [&str; 4] = ["(3)", "(4;2,1)", "(3;1,1)", "(3;1,1,1,1)"];

pub fn expansion(label: &str) -> NegativeWeightExpansion {
    NegativeWeightExpansion::parse(label).expect("benchmark expansion")
}
