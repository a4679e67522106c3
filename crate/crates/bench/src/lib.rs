//! Criterion benchmarks for `logcount-core`; see `benches/`.
