//! Criterion benchmarks for framelab; see `benches/`.
