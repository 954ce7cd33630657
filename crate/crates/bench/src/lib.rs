//! Criterion benchmarks for the relrips core; see `benches/`.
