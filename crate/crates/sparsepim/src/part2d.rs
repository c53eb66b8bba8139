//! 2D tiling across cores: equally-sized, equally-wide, and variable-sized
//! grids with configurable vertical partitions.
//!
//! Cores are arranged as `n_cores / n_vertical` tile rows by `n_vertical`
//! tile columns; cores of the same vertical partition are consecutive, so a
//! rank groups tiles that share an input-vector slice. Every vertical
//! partition produces a full-height set of partial outputs that the host
//! merges.

use crate::error::{Error, Result};
use crate::formats::SparseMatrix;
use crate::matio::{Triplet, TripletMatrix};
use crate::part1d::SplitRow;
use crate::region::{assign_region, even_ranges_last, greedy_ranges, Region};
use crate::scalar::Scalar;
use crate::scheme::{CoreBalance, KernelId, PartKind};
use serde::Serialize;
use std::ops::Range;

/// One core's tile.
#[derive(Debug, Clone)]
pub struct Tile<S> {
    pub core: usize,
    /// Which vertical partition this tile belongs to.
    pub partition: usize,
    /// Global output rows (tiles of one partition overlap only on split
    /// rows).
    pub row_range: Range<usize>,
    /// Global input-vector slice (shared by all tiles of the partition).
    pub col_range: Range<usize>,
    /// Fragment with indices local to `(row_range.start, col_range.start)`.
    pub fragment: SparseMatrix<S>,
    pub nnz: usize,
}

/// A 2D partition plan.
#[derive(Debug, Clone)]
pub struct TwoDPlan<S> {
    pub kernel: KernelId,
    pub n_rows: usize,
    pub n_cols: usize,
    pub total_nnz: usize,
    pub n_vertical: usize,
    /// Tiles ordered by core index (partition-major).
    pub tiles: Vec<Tile<S>>,
    /// Column boundaries of the vertical partitions, length `n_vertical+1`.
    pub col_boundaries: Vec<usize>,
    /// Split (block) rows within partitions.
    pub split_rows: Vec<SplitRow>,
}

impl<S: Scalar> TwoDPlan<S> {
    /// Per-core partial-result lengths in elements: the retrieve phase moves
    /// these and the host merges them.
    pub fn merge_requirements(&self) -> Vec<usize> {
        self.tiles.iter().map(|t| t.row_range.len()).collect()
    }

    /// JSON-exportable grid geometry with per-tile nnz.
    pub fn grid_summary(&self) -> GridSummary {
        GridSummary {
            scheme: self.kernel.name().to_string(),
            n_cores: self.tiles.len(),
            n_vertical: self.n_vertical,
            col_boundaries: self.col_boundaries.clone(),
            tiles: self
                .tiles
                .iter()
                .map(|t| TileSummary {
                    core: t.core,
                    partition: t.partition,
                    rows: (t.row_range.start, t.row_range.end),
                    cols: (t.col_range.start, t.col_range.end),
                    nnz: t.nnz,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub scheme: String,
    pub n_cores: usize,
    pub n_vertical: usize,
    pub col_boundaries: Vec<usize>,
    pub tiles: Vec<TileSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TileSummary {
    pub core: usize,
    pub partition: usize,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub nnz: usize,
}

/// Splits `m` into a 2D grid of `n_cores` tiles over `n_vertical` vertical
/// partitions according to the kernel's scheme.
pub fn plan_2d<S: Scalar>(
    m: &TripletMatrix<S>,
    kernel: KernelId,
    n_cores: usize,
    n_vertical: usize,
    block_dims: (usize, usize),
) -> Result<TwoDPlan<S>> {
    if !kernel.partitioning.is_two_d() {
        return Err(Error::Plan(format!("{} is not a 2D kernel", kernel.name())));
    }
    if n_vertical == 0 || n_vertical > n_cores || !n_cores.is_multiple_of(n_vertical) {
        return Err(Error::Plan(format!(
            "n_vertical = {n_vertical} must divide n_cores = {n_cores}"
        )));
    }
    let tiles_per_partition = n_cores / n_vertical;

    // Vertical partition boundaries.
    let col_ranges: Vec<Range<usize>> = match kernel.partitioning {
        PartKind::EquallySized | PartKind::EquallyWide => {
            even_ranges_last(m.n_cols(), n_vertical)
        }
        PartKind::VariableSized => {
            let weights: Vec<u64> = m.col_counts().iter().map(|&c| c as u64).collect();
            greedy_ranges(&weights, n_vertical)
        }
        PartKind::OneD => unreachable!(),
    };
    let mut col_boundaries: Vec<usize> = col_ranges.iter().map(|r| r.start).collect();
    col_boundaries.push(m.n_cols());

    // Bucket the triplets per partition; (row, col) order is preserved.
    let mut buckets: Vec<Vec<Triplet<S>>> = vec![Vec::new(); n_vertical];
    for t in m.entries() {
        let v = col_ranges
            .iter()
            .position(|r| r.contains(&t.col))
            .expect("column ranges cover the matrix");
        buckets[v].push(Triplet {
            row: t.row,
            col: t.col - col_ranges[v].start,
            value: t.value,
        });
    }

    let balance = match kernel.partitioning {
        PartKind::EquallySized => CoreBalance::Static,
        _ => kernel.core_balance,
    };

    let mut tiles = Vec::with_capacity(n_cores);
    let mut split_rows = Vec::new();
    for (v, (col_range, triplets)) in col_ranges.iter().zip(buckets).enumerate() {
        let region =
            Region { n_rows: m.n_rows(), n_cols: col_range.len(), triplets };
        let (cores, splits) =
            assign_region(&region, kernel.format, block_dims, balance, tiles_per_partition)?;
        for s in splits {
            split_rows.push(SplitRow {
                row: s.row,
                core_a: v * tiles_per_partition + s.left,
                core_b: v * tiles_per_partition + s.right,
            });
        }
        for (h, rc) in cores.into_iter().enumerate() {
            tiles.push(Tile {
                core: v * tiles_per_partition + h,
                partition: v,
                row_range: rc.output,
                col_range: col_range.clone(),
                fragment: rc.fragment,
                nnz: rc.nnz,
            });
        }
    }

    Ok(TwoDPlan {
        kernel,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        total_nnz: m.nnz(),
        n_vertical,
        tiles,
        col_boundaries,
        split_rows,
    })
}
