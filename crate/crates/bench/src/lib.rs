//! Criterion benchmarks for boltzknn live under `benches/`.
