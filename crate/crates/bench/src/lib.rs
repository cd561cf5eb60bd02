//! Criterion benchmarks for the `qerasure` kernels live in `benches/`.
