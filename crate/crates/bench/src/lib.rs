//! Benchmarks for the robust maximization algorithms live under `benches/`.
