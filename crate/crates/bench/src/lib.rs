//! Criterion benchmarks for the counting pipelines and functionals; see
//! `benches/counting.rs`.
