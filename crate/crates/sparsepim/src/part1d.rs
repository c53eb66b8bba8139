//! 1D (horizontal) partitioning of a matrix across cores.
//!
//! Every core receives a horizontal fragment and the whole input vector;
//! output ranges are contiguous and ordered by core. Exact nnz balancing
//! (COO.nnz, and the BCOO schemes at block granularity) may split a row or
//! block row between neighboring cores, producing a few host-merged partials.

use crate::error::{Error, Result};
use crate::formats::SparseMatrix;
use crate::region::{assign_region, Region, RegionCore};
use crate::scalar::Scalar;
use crate::scheme::{CoreBalance, KernelId, PartKind};
use serde::Serialize;
use std::ops::Range;

/// A row (or the first row of a block row) computed by two adjacent cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitRow {
    pub row: usize,
    pub core_a: usize,
    pub core_b: usize,
}

/// One core's share of a 1D plan.
#[derive(Debug, Clone)]
pub struct CoreAssignment<S> {
    pub core: usize,
    /// Fragment re-encoded with local row indices; columns are global.
    pub fragment: SparseMatrix<S>,
    /// Global output rows this core produces (partials for split rows).
    pub output_range: Range<usize>,
    /// Global input-vector slice the core needs (the full vector in 1D).
    pub input_range: Range<usize>,
    pub nnz: usize,
}

/// A 1D partition plan.
#[derive(Debug, Clone)]
pub struct OneDPlan<S> {
    pub kernel: KernelId,
    pub n_rows: usize,
    pub n_cols: usize,
    pub total_nnz: usize,
    pub cores: Vec<CoreAssignment<S>>,
    pub split_rows: Vec<SplitRow>,
}

impl<S: Scalar> OneDPlan<S> {
    /// Upper bound on host-merged partial elements: one per split row, `r`
    /// per split block row.
    pub fn merge_partial_bound(&self) -> usize {
        let r = self.cores.first().and_then(|c| c.fragment.block_dims()).map_or(1, |(r, _)| r);
        self.split_rows.len() * r
    }

    /// Per-core balance summary for reports.
    pub fn summary(&self, scalar_width: usize) -> PlanSummary {
        PlanSummary {
            scheme: self.kernel.name().to_string(),
            n_cores: self.cores.len(),
            total_nnz: self.total_nnz,
            split_rows: self.split_rows.len(),
            cores: self
                .cores
                .iter()
                .map(|c| CoreSummary {
                    core: c.core,
                    rows: c.output_range.len(),
                    nnz: c.nnz,
                    input_elems: c.input_range.len(),
                    output_bytes_aligned: align8(c.output_range.len() * scalar_width),
                })
                .collect(),
        }
    }
}

fn align8(bytes: usize) -> usize {
    bytes.div_ceil(8) * 8
}

/// JSON-exportable plan summary (per-core nnz/rows/bytes).
#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub scheme: String,
    pub n_cores: usize,
    pub total_nnz: usize,
    pub split_rows: usize,
    pub cores: Vec<CoreSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreSummary {
    pub core: usize,
    pub rows: usize,
    pub nnz: usize,
    pub input_elems: usize,
    /// Output bytes rounded up to the 8-byte transfer granularity.
    pub output_bytes_aligned: usize,
}

/// Splits `m` horizontally across `n_cores` cores using the kernel's
/// balancing rule.
pub fn plan_1d<S: Scalar>(
    m: &SparseMatrix<S>,
    kernel: KernelId,
    n_cores: usize,
) -> Result<OneDPlan<S>> {
    if kernel.partitioning != PartKind::OneD {
        return Err(Error::Plan(format!("{} is not a 1D kernel", kernel.name())));
    }
    if kernel.format != m.format() {
        return Err(Error::Plan(format!(
            "kernel {} expects format {} but the matrix is {}",
            kernel.name(),
            kernel.format.name(),
            m.format().name()
        )));
    }
    if n_cores == 0 {
        return Err(Error::Plan("at least one core required".into()));
    }
    debug_assert!(kernel.core_balance != CoreBalance::Static);

    let region = Region {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        triplets: m.triplets(),
    };
    let block_dims = m.block_dims().unwrap_or(crate::formats::DEFAULT_BLOCK_DIMS);
    let (cores, splits) =
        assign_region(&region, kernel.format, block_dims, kernel.core_balance, n_cores)?;

    let n_cols = m.n_cols();
    let cores = cores
        .into_iter()
        .enumerate()
        .map(|(i, rc): (usize, RegionCore<S>)| CoreAssignment {
            core: i,
            fragment: rc.fragment,
            output_range: rc.output,
            input_range: 0..n_cols,
            nnz: rc.nnz,
        })
        .collect();
    let split_rows = splits
        .into_iter()
        .map(|s| SplitRow { row: s.row, core_a: s.left, core_b: s.right })
        .collect();
    Ok(OneDPlan {
        kernel,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        total_nnz: m.nnz(),
        cores,
        split_rows,
    })
}
