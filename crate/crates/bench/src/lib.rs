//! Criterion benchmarks for the core samplers and solvers live under `benches/`.
