//! Criterion benchmarks of the `anv-core` kernels; run with `cargo bench -p anv-bench`.
