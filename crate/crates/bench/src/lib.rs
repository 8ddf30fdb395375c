//! Criterion benchmarks for deldyn; see `benches/`.
