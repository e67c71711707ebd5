//! Criterion benchmarks for heckelab; see `benches/`.
