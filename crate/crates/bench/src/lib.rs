//! Criterion benchmarks for the newstag pipeline live in `benches/`.
