//! Criterion benchmarks for the finob engine; see `benches/engine.rs`.
