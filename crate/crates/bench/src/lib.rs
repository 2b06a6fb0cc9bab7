//! Criterion benchmarks for the simulator, task generation, episodes and reporting.
//! Run with `cargo bench -p taskbot-bench`.
