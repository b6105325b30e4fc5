//! Criterion benchmarks for the pricing and transform hot paths; see `benches/`.
