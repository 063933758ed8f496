//! Criterion benchmarks for the mqslab kernels; see `benches/`.
