//! Benchmarks for corrtail-core.
