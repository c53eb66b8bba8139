//! Compare the 1D balancing schemes on a skewed matrix.
//!
//! Row-balanced schemes give every core the same row count; nnz-balanced
//! schemes at row granularity chase equal work but are limited by row
//! boundaries; exact COO balancing splits rows and leaves at most one
//! host-merged partial per neighboring core pair.

use sparsepim::formats::encode;
use sparsepim::matio::{generate_synthetic, SynthKind};
use sparsepim::part1d::plan_1d;
use sparsepim::scheme::{kernel_by_name, registry, PartKind};

fn main() -> sparsepim::Result<()> {
    let raw = generate_synthetic(&SynthKind::PowerLaw { nnz: 4000, exponent: 2.0 }, 256, 13)?
        .cast::<i64>();
    let cores = 8;

    println!("matrix: 256 x 256, nnz {}, 8 cores\n", raw.nnz());
    println!("{:<14} {:>22} {:>8} {:>6}", "scheme", "per-core nnz", "max/min", "splits");
    for kernel in registry().into_iter().filter(|k| k.partitioning == PartKind::OneD) {
        let m = encode(&raw, kernel.format, None)?;
        let plan = plan_1d(&m, kernel, cores)?;
        let counts: Vec<usize> = plan.cores.iter().map(|c| c.nnz).collect();
        let max = *counts.iter().max().unwrap();
        let min = *counts.iter().min().unwrap();
        println!(
            "{:<14} {:>22} {:>8} {:>6}",
            kernel.name(),
            format!("{counts:?}"),
            format!("{max}/{min}"),
            plan.split_rows.len()
        );
    }

    // The plan summary exports as JSON for balance reports.
    let m = encode(&raw, sparsepim::formats::Format::Coo, None)?;
    let plan = plan_1d(&m, kernel_by_name("COO.nnz").unwrap(), cores)?;
    println!(
        "\nCOO.nnz plan summary (JSON):\n{}",
        serde_json::to_string_pretty(&plan.summary(8)).unwrap()
    );
    Ok(())
}
