//! A deterministic simulator and design-space explorer for sparse
//! matrix-vector multiplication on near-bank processing-in-memory systems.
//!
//! The library models a host CPU driving thousands of simple memory-side
//! cores, each owning one DRAM bank. A SpMV run moves through four phases:
//! load the input vector into the banks, run the kernel on every core,
//! retrieve partial results, and merge them on the host. The crate provides
//!
//! - four compressed formats (CSR, COO, BCSR, BCOO) over six element types,
//! - 1D and 2D matrix partitioning across cores with the full set of
//!   balancing schemes (25 registered kernels),
//! - per-core multithreaded execution with thread balancing and three
//!   synchronization modes, instrumented with access counters,
//! - an analytic phase-time model (roofline kernels, padded parallel
//!   transfers, host merge), and
//! - Matrix Market ingestion, seeded synthetic generators, and sweep tools.
//!
//! Results are bit-deterministic: integer kernels match a dense reference
//! exactly, and float kernels fix one canonical reduction order.
//!
//! See the `examples/` directory for runnable tours of each capability, and
//! the `sparsepim` binary for the experiment CLI.

pub mod error;
pub mod exec;
pub mod formats;
pub mod host;
pub mod machine;
pub mod matio;
pub mod part1d;
pub mod part2d;
pub mod scalar;
pub mod scheme;

mod region;

pub mod cli;

pub use error::{Error, Result};
pub use scalar::{Dtype, Scalar};
