//! Benchmarks for the crw-qed kernels live in `benches/`.
