//! Shared balancing machinery behind the 1D and 2D planners.
//!
//! A region is either the whole matrix (1D) or one vertical partition (2D).
//! Balancers carve its rows, tuples, block rows, or blocks into per-core
//! pieces; output row ranges always tile the region's full height so that
//! host merging sees every output index covered, and consecutive cores
//! overlap exactly on split rows (or split block rows).

use crate::error::{Error, Result};
use crate::formats::{from_sorted_parts, Format, SparseMatrix};
use crate::matio::Triplet;
use crate::scalar::Scalar;
use crate::scheme::CoreBalance;
use std::ops::Range;

/// Counts per part differ by at most one; the first `n % parts` parts take
/// the extra item, so trailing parts go empty when parts exceed items.
pub(crate) fn even_ranges_first(n_items: usize, parts: usize) -> Vec<Range<usize>> {
    even_ranges(n_items, parts, false)
}

/// Counts per part differ by at most one; remainder items go to the last
/// parts (the rule for statically shaped 2D grids).
pub(crate) fn even_ranges_last(n_items: usize, parts: usize) -> Vec<Range<usize>> {
    even_ranges(n_items, parts, true)
}

fn even_ranges(n_items: usize, parts: usize, remainder_last: bool) -> Vec<Range<usize>> {
    let base = n_items / parts;
    let rem = n_items % parts;
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let extra = if remainder_last { p >= parts - rem } else { p < rem };
        let len = base + usize::from(extra);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

/// Greedy prefix split over weighted items: part boundary `k` is the first
/// item index whose cumulative weight reaches `k/parts` of the total. An
/// item landing exactly on the target stays with the earlier part.
pub(crate) fn greedy_ranges(weights: &[u64], parts: usize) -> Vec<Range<usize>> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    let p = parts as u128;
    let mut ranges = Vec::with_capacity(parts);
    let mut cum: u128 = 0;
    let mut item = 0usize;
    let mut start = 0usize;
    for k in 1..=parts {
        let target = total * k as u128;
        if k == parts {
            item = weights.len();
        } else {
            while item < weights.len() && cum * p < target {
                cum += weights[item] as u128;
                item += 1;
            }
        }
        ranges.push(start..item);
        start = item;
    }
    ranges
}

/// Exact item split: boundary `k` sits at `k * total / parts`, so part sizes
/// differ by at most one and the larger parts come last.
pub(crate) fn exact_ranges(total: usize, parts: usize) -> Vec<Range<usize>> {
    (0..parts)
        .map(|k| (k * total / parts)..((k + 1) * total / parts))
        .collect()
}

/// A matrix sub-rectangle in local coordinates, triplets sorted by
/// `(row, col)`.
pub(crate) struct Region<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub triplets: Vec<Triplet<S>>,
}

impl<S: Scalar> Region<S> {
    /// `row_starts[r]` = index of the first triplet with row >= r.
    fn row_starts(&self) -> Vec<usize> {
        let mut starts = vec![0usize; self.n_rows + 1];
        let mut t = 0;
        for (r, start) in starts.iter_mut().enumerate() {
            while t < self.triplets.len() && self.triplets[t].row < r {
                t += 1;
            }
            *start = t;
        }
        starts
    }

    fn row_weights(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.n_rows];
        for t in &self.triplets {
            w[t.row] += 1;
        }
        w
    }
}

/// One core's share of a region.
pub(crate) struct RegionCore<S> {
    pub fragment: SparseMatrix<S>,
    /// Output rows, local to the region. Ranges tile `0..n_rows`; adjacent
    /// cores overlap exactly on split (block) rows.
    pub output: Range<usize>,
    pub nnz: usize,
}

/// A row (or block row) shared between two adjacent cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RegionSplit {
    /// First local row of the shared (block) row.
    pub row: usize,
    pub left: usize,
    pub right: usize,
}

/// A block of the region's block decomposition, carrying the indices of its
/// triplets.
struct BlockRef {
    brow: usize,
    triplet_ids: Range<usize>,
}

/// Decomposes the region into (block row, block col)-sorted blocks and
/// returns the permuted triplet order alongside the block list.
fn block_refs<S: Scalar>(region: &Region<S>, r: usize, c: usize) -> (Vec<usize>, Vec<BlockRef>) {
    let mut order: Vec<usize> = (0..region.triplets.len()).collect();
    order.sort_unstable_by_key(|&i| {
        let t = &region.triplets[i];
        (t.row / r, t.col / c, t.row, t.col)
    });
    let mut blocks: Vec<BlockRef> = Vec::new();
    let mut start = 0usize;
    while start < order.len() {
        let t = &region.triplets[order[start]];
        let key = (t.row / r, t.col / c);
        let mut end = start + 1;
        while end < order.len() {
            let u = &region.triplets[order[end]];
            if (u.row / r, u.col / c) != key {
                break;
            }
            end += 1;
        }
        blocks.push(BlockRef { brow: key.0, triplet_ids: start..end });
        start = end;
    }
    (order, blocks)
}

/// Splits a region across `parts` cores according to the balancing rule.
pub(crate) fn assign_region<S: Scalar>(
    region: &Region<S>,
    format: Format,
    block_dims: (usize, usize),
    balance: CoreBalance,
    parts: usize,
) -> Result<(Vec<RegionCore<S>>, Vec<RegionSplit>)> {
    if parts == 0 {
        return Err(Error::Plan("at least one core required".into()));
    }
    let (r, _c) = block_dims;
    match (format, balance) {
        (Format::Csr | Format::Coo, CoreBalance::Rows) => Ok((
            row_range_cores(region, format, block_dims, even_ranges_first(region.n_rows, parts)),
            vec![],
        )),
        (Format::Csr | Format::Coo, CoreBalance::NnzRowGrain) => {
            let ranges = greedy_ranges(&region.row_weights(), parts);
            Ok((row_range_cores(region, format, block_dims, ranges), vec![]))
        }
        (Format::Coo, CoreBalance::Nnz) => {
            let bounds = exact_ranges(region.triplets.len(), parts);
            Ok(tuple_list_cores(region, format, block_dims, bounds))
        }
        (_, CoreBalance::Static) => {
            // Statically shaped grids slice plain row ranges, remainder to
            // the last tiles; blocks re-form locally.
            Ok((
                row_range_cores(region, format, block_dims, even_ranges_last(region.n_rows, parts)),
                vec![],
            ))
        }
        (Format::Bcsr, CoreBalance::Blocks | CoreBalance::NnzRowGrain) => {
            let (order, blocks) = block_refs(region, block_dims.0, block_dims.1);
            let n_block_rows = region.n_rows.div_ceil(r);
            let mut weights = vec![0u64; n_block_rows];
            for b in &blocks {
                weights[b.brow] += match balance {
                    CoreBalance::Blocks => 1,
                    _ => b.triplet_ids.len() as u64,
                };
            }
            let _ = order;
            let ranges = greedy_ranges(&weights, parts)
                .into_iter()
                .map(|br| (br.start * r).min(region.n_rows)..(br.end * r).min(region.n_rows))
                .collect();
            Ok((row_range_cores(region, format, block_dims, ranges), vec![]))
        }
        (Format::Bcoo, CoreBalance::Blocks | CoreBalance::Nnz) => {
            let (order, blocks) = block_refs(region, block_dims.0, block_dims.1);
            let bounds = match balance {
                CoreBalance::Blocks => exact_ranges(blocks.len(), parts),
                _ => {
                    let weights: Vec<u64> =
                        blocks.iter().map(|b| b.triplet_ids.len() as u64).collect();
                    greedy_ranges(&weights, parts)
                }
            };
            Ok(block_list_cores(region, format, block_dims, &order, &blocks, bounds))
        }
        (f, b) => Err(Error::Plan(format!(
            "balance {b:?} is not defined for format {}",
            f.name()
        ))),
    }
}

/// Cores over contiguous row ranges (no splits, full cover by construction).
fn row_range_cores<S: Scalar>(
    region: &Region<S>,
    format: Format,
    block_dims: (usize, usize),
    ranges: Vec<Range<usize>>,
) -> Vec<RegionCore<S>> {
    let starts = region.row_starts();
    ranges
        .into_iter()
        .map(|rows| {
            let slice = &region.triplets[starts[rows.start]..starts[rows.end]];
            let local: Vec<Triplet<S>> = slice
                .iter()
                .map(|t| Triplet { row: t.row - rows.start, col: t.col, value: t.value })
                .collect();
            let fragment =
                from_sorted_parts(rows.len(), region.n_cols, &local, format, Some(block_dims));
            RegionCore { fragment, nnz: local.len(), output: rows }
        })
        .collect()
}

/// Extent of one core's items in local rows: first row, end row (exclusive),
/// and the group keys used to detect shared (block) rows at boundaries.
struct ItemSpan {
    first_row: usize,
    end_row: usize,
    first_group: usize,
    last_group: usize,
}

/// Derives per-core output ranges from item spans: ranges tile `0..n_rows`,
/// trailing gaps attach to the earlier core, and a group shared across a
/// boundary makes the two ranges overlap on exactly that (block) row span.
fn stitch_outputs(
    spans: &[Option<ItemSpan>],
    n_rows: usize,
    group_rows: impl Fn(usize) -> Range<usize>,
) -> (Vec<Range<usize>>, Vec<RegionSplit>) {
    let parts = spans.len();
    let mut outputs: Vec<Range<usize>> = vec![0..0; parts];
    let mut splits = Vec::new();
    let nonempty: Vec<usize> = (0..parts).filter(|&i| spans[i].is_some()).collect();
    if nonempty.is_empty() {
        // Nothing to compute anywhere; the first core owns the whole height
        // so that merging still covers every output index.
        if parts > 0 {
            outputs[0] = 0..n_rows;
            for out in outputs.iter_mut().skip(1) {
                *out = n_rows..n_rows;
            }
        }
        return (outputs, splits);
    }
    for (pos, &k) in nonempty.iter().enumerate() {
        let span = spans[k].as_ref().unwrap();
        let start = if pos == 0 { 0 } else { outputs[nonempty[pos - 1]].end.min(span.first_row) };
        let end = if pos + 1 == nonempty.len() {
            n_rows
        } else {
            let next = spans[nonempty[pos + 1]].as_ref().unwrap();
            if next.first_group == span.last_group {
                // Shared (block) row: both cores produce partials for it.
                splits.push(RegionSplit {
                    row: group_rows(span.last_group).start,
                    left: k,
                    right: nonempty[pos + 1],
                });
                span.end_row
            } else {
                next.first_row
            }
        };
        outputs[k] = start..end;
    }
    // Empty cores sit (zero-length) at the current cover position.
    let mut cursor = 0usize;
    for k in 0..parts {
        if spans[k].is_some() {
            cursor = outputs[k].end;
        } else {
            outputs[k] = cursor..cursor;
        }
    }
    (outputs, splits)
}

/// Cores over tuple-list ranges (COO exact nnz balance; may split rows).
fn tuple_list_cores<S: Scalar>(
    region: &Region<S>,
    format: Format,
    block_dims: (usize, usize),
    bounds: Vec<Range<usize>>,
) -> (Vec<RegionCore<S>>, Vec<RegionSplit>) {
    let spans: Vec<Option<ItemSpan>> = bounds
        .iter()
        .map(|b| {
            if b.is_empty() {
                None
            } else {
                let first = &region.triplets[b.start];
                let last = &region.triplets[b.end - 1];
                Some(ItemSpan {
                    first_row: first.row,
                    end_row: last.row + 1,
                    first_group: first.row,
                    last_group: last.row,
                })
            }
        })
        .collect();
    let (outputs, splits) = stitch_outputs(&spans, region.n_rows, |row| row..row + 1);
    let cores = bounds
        .into_iter()
        .zip(&outputs)
        .map(|(b, out)| {
            let local: Vec<Triplet<S>> = region.triplets[b.clone()]
                .iter()
                .map(|t| Triplet { row: t.row - out.start, col: t.col, value: t.value })
                .collect();
            let fragment =
                from_sorted_parts(out.len(), region.n_cols, &local, format, Some(block_dims));
            RegionCore { fragment, nnz: local.len(), output: out.clone() }
        })
        .collect();
    (cores, splits)
}

/// Cores over block-list ranges (BCOO; may split block rows).
fn block_list_cores<S: Scalar>(
    region: &Region<S>,
    format: Format,
    block_dims: (usize, usize),
    order: &[usize],
    blocks: &[BlockRef],
    bounds: Vec<Range<usize>>,
) -> (Vec<RegionCore<S>>, Vec<RegionSplit>) {
    let r = block_dims.0;
    let brow_rows = |brow: usize| (brow * r)..((brow + 1) * r).min(region.n_rows);
    let spans: Vec<Option<ItemSpan>> = bounds
        .iter()
        .map(|b| {
            if b.is_empty() {
                None
            } else {
                let first = &blocks[b.start];
                let last = &blocks[b.end - 1];
                Some(ItemSpan {
                    first_row: brow_rows(first.brow).start,
                    end_row: brow_rows(last.brow).end,
                    first_group: first.brow,
                    last_group: last.brow,
                })
            }
        })
        .collect();
    let (outputs, splits) = stitch_outputs(&spans, region.n_rows, brow_rows);
    let cores = bounds
        .into_iter()
        .zip(&outputs)
        .map(|(b, out)| {
            let mut local: Vec<Triplet<S>> = blocks[b]
                .iter()
                .flat_map(|blk| order[blk.triplet_ids.clone()].iter())
                .map(|&i| {
                    let t = &region.triplets[i];
                    Triplet { row: t.row - out.start, col: t.col, value: t.value }
                })
                .collect();
            local.sort_unstable_by_key(|t| (t.row, t.col));
            let fragment =
                from_sorted_parts(out.len(), region.n_cols, &local, format, Some(block_dims));
            RegionCore { fragment, nnz: local.len(), output: out.clone() }
        })
        .collect();
    (cores, splits)
}
