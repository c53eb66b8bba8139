//! The four compressed matrix formats and per-fragment re-encoding.
//!
//! Every format reconstructs the original dense matrix exactly. Blocked
//! formats store dense `r x c` sub-blocks, zero-padded at matrix borders, and
//! record the minimal block set (only blocks holding at least one nonzero).

use crate::error::{Error, Result};
use crate::matio::{Triplet, TripletMatrix};
use crate::scalar::Scalar;
use serde::Serialize;
use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

/// Format tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Format {
    Csr,
    Coo,
    Bcsr,
    Bcoo,
}

impl Format {
    pub fn is_blocked(self) -> bool {
        matches!(self, Format::Bcsr | Format::Bcoo)
    }

    pub fn name(self) -> &'static str {
        match self {
            Format::Csr => "CSR",
            Format::Coo => "COO",
            Format::Bcsr => "BCSR",
            Format::Bcoo => "BCOO",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CSR" => Ok(Format::Csr),
            "COO" => Ok(Format::Coo),
            "BCSR" => Ok(Format::Bcsr),
            "BCOO" => Ok(Format::Bcoo),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Compressed sparse row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rowptr: Vec<usize>,
    pub colind: Vec<usize>,
    pub values: Vec<S>,
}

/// Coordinate format: row-sorted tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub tuples: Vec<Triplet<S>>,
}

/// Block compressed sparse row with dense `r x c` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BcsrMatrix<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub r: usize,
    pub c: usize,
    pub browptr: Vec<usize>,
    pub bcolind: Vec<usize>,
    /// Dense block payloads, `n_blocks * r * c` scalars, block-major then
    /// row-major within a block.
    pub bvalues: Vec<S>,
    /// Nonzeros of the original matrix (excludes block padding).
    pub nnz: usize,
}

/// Block coordinate format: the block counterpart of COO.
#[derive(Debug, Clone, PartialEq)]
pub struct BcooMatrix<S> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub r: usize,
    pub c: usize,
    pub browind: Vec<usize>,
    pub bcolind: Vec<usize>,
    pub bvalues: Vec<S>,
    pub nnz: usize,
}

impl<S: Scalar> BcsrMatrix<S> {
    pub fn n_blocks(&self) -> usize {
        self.bcolind.len()
    }

    pub fn n_block_rows(&self) -> usize {
        self.browptr.len() - 1
    }

    /// nnz / (blocks * r * c).
    pub fn fill_ratio(&self) -> f64 {
        if self.n_blocks() == 0 {
            return 0.0;
        }
        self.nnz as f64 / (self.n_blocks() * self.r * self.c) as f64
    }
}

impl<S: Scalar> BcooMatrix<S> {
    pub fn n_blocks(&self) -> usize {
        self.browind.len()
    }

    pub fn fill_ratio(&self) -> f64 {
        if self.n_blocks() == 0 {
            return 0.0;
        }
        self.nnz as f64 / (self.n_blocks() * self.r * self.c) as f64
    }
}

/// A matrix in any of the four formats.
#[derive(Debug, Clone, PartialEq)]
pub enum SparseMatrix<S> {
    Csr(CsrMatrix<S>),
    Coo(CooMatrix<S>),
    Bcsr(BcsrMatrix<S>),
    Bcoo(BcooMatrix<S>),
}

pub fn to_csr<S: Scalar>(m: &TripletMatrix<S>) -> CsrMatrix<S> {
    csr_from_sorted(m.n_rows(), m.n_cols(), m.entries())
}

pub fn to_coo<S: Scalar>(m: &TripletMatrix<S>) -> CooMatrix<S> {
    coo_from_sorted(m.n_rows(), m.n_cols(), m.entries())
}

pub fn to_bcsr<S: Scalar>(m: &TripletMatrix<S>, r: usize, c: usize) -> Result<BcsrMatrix<S>> {
    check_block_dims(r, c)?;
    Ok(bcsr_from_sorted(m.n_rows(), m.n_cols(), m.entries(), r, c))
}

pub fn to_bcoo<S: Scalar>(m: &TripletMatrix<S>, r: usize, c: usize) -> Result<BcooMatrix<S>> {
    check_block_dims(r, c)?;
    Ok(bcoo_from_sorted(m.n_rows(), m.n_cols(), m.entries(), r, c))
}

/// Encodes triplets into the requested format. `block_dims` applies to the
/// blocked formats only (defaults to 4x4).
pub fn encode<S: Scalar>(
    m: &TripletMatrix<S>,
    format: Format,
    block_dims: Option<(usize, usize)>,
) -> Result<SparseMatrix<S>> {
    let (r, c) = block_dims.unwrap_or(DEFAULT_BLOCK_DIMS);
    Ok(match format {
        Format::Csr => SparseMatrix::Csr(to_csr(m)),
        Format::Coo => SparseMatrix::Coo(to_coo(m)),
        Format::Bcsr => SparseMatrix::Bcsr(to_bcsr(m, r, c)?),
        Format::Bcoo => SparseMatrix::Bcoo(to_bcoo(m, r, c)?),
    })
}

/// Block dimensions used when none are requested.
pub const DEFAULT_BLOCK_DIMS: (usize, usize) = (4, 4);

fn check_block_dims(r: usize, c: usize) -> Result<()> {
    if r == 0 || c == 0 {
        return Err(Error::Range("block dimensions must be positive".into()));
    }
    Ok(())
}

pub(crate) fn csr_from_sorted<S: Scalar>(
    n_rows: usize,
    n_cols: usize,
    entries: &[Triplet<S>],
) -> CsrMatrix<S> {
    let mut rowptr = vec![0usize; n_rows + 1];
    for t in entries {
        rowptr[t.row + 1] += 1;
    }
    for i in 0..n_rows {
        rowptr[i + 1] += rowptr[i];
    }
    CsrMatrix {
        n_rows,
        n_cols,
        rowptr,
        colind: entries.iter().map(|t| t.col).collect(),
        values: entries.iter().map(|t| t.value).collect(),
    }
}

pub(crate) fn coo_from_sorted<S: Scalar>(
    n_rows: usize,
    n_cols: usize,
    entries: &[Triplet<S>],
) -> CooMatrix<S> {
    CooMatrix { n_rows, n_cols, tuples: entries.to_vec() }
}

pub(crate) fn bcsr_from_sorted<S: Scalar>(
    n_rows: usize,
    n_cols: usize,
    entries: &[Triplet<S>],
    r: usize,
    c: usize,
) -> BcsrMatrix<S> {
    let bcoo = bcoo_from_sorted(n_rows, n_cols, entries, r, c);
    let n_block_rows = n_rows.div_ceil(r);
    let mut browptr = vec![0usize; n_block_rows + 1];
    for &br in &bcoo.browind {
        browptr[br + 1] += 1;
    }
    for i in 0..n_block_rows {
        browptr[i + 1] += browptr[i];
    }
    BcsrMatrix {
        n_rows,
        n_cols,
        r,
        c,
        browptr,
        bcolind: bcoo.bcolind,
        bvalues: bcoo.bvalues,
        nnz: bcoo.nnz,
    }
}

pub(crate) fn bcoo_from_sorted<S: Scalar>(
    n_rows: usize,
    n_cols: usize,
    entries: &[Triplet<S>],
    r: usize,
    c: usize,
) -> BcooMatrix<S> {
    // Entries are sorted by (row, col); blocks must be sorted by
    // (block row, block col), so re-key and sort block coordinates.
    let mut keyed: Vec<(usize, usize, usize)> = entries
        .iter()
        .enumerate()
        .map(|(i, t)| (t.row / r, t.col / c, i))
        .collect();
    keyed.sort_unstable_by_key(|&(br, bc, _)| (br, bc));

    let mut browind = Vec::new();
    let mut bcolind = Vec::new();
    let mut bvalues: Vec<S> = Vec::new();
    for &(br, bc, i) in &keyed {
        if browind.last() != Some(&br) || bcolind.last() != Some(&bc) {
            browind.push(br);
            bcolind.push(bc);
            bvalues.extend(std::iter::repeat_n(S::zero(), r * c));
        }
        let t = &entries[i];
        let base = bvalues.len() - r * c;
        bvalues[base + (t.row % r) * c + (t.col % c)] = t.value;
    }
    BcooMatrix { n_rows, n_cols, r, c, browind, bcolind, bvalues, nnz: entries.len() }
}

impl<S: Scalar> SparseMatrix<S> {
    pub fn format(&self) -> Format {
        match self {
            SparseMatrix::Csr(_) => Format::Csr,
            SparseMatrix::Coo(_) => Format::Coo,
            SparseMatrix::Bcsr(_) => Format::Bcsr,
            SparseMatrix::Bcoo(_) => Format::Bcoo,
        }
    }

    pub fn n_rows(&self) -> usize {
        match self {
            SparseMatrix::Csr(m) => m.n_rows,
            SparseMatrix::Coo(m) => m.n_rows,
            SparseMatrix::Bcsr(m) => m.n_rows,
            SparseMatrix::Bcoo(m) => m.n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            SparseMatrix::Csr(m) => m.n_cols,
            SparseMatrix::Coo(m) => m.n_cols,
            SparseMatrix::Bcsr(m) => m.n_cols,
            SparseMatrix::Bcoo(m) => m.n_cols,
        }
    }

    /// Nonzeros of the underlying matrix (block padding excluded).
    pub fn nnz(&self) -> usize {
        match self {
            SparseMatrix::Csr(m) => m.values.len(),
            SparseMatrix::Coo(m) => m.tuples.len(),
            SparseMatrix::Bcsr(m) => m.nnz,
            SparseMatrix::Bcoo(m) => m.nnz,
        }
    }

    pub fn block_dims(&self) -> Option<(usize, usize)> {
        match self {
            SparseMatrix::Bcsr(m) => Some((m.r, m.c)),
            SparseMatrix::Bcoo(m) => Some((m.r, m.c)),
            _ => None,
        }
    }

    /// Decodes back to sorted triplets, dropping block padding zeros.
    pub fn triplets(&self) -> Vec<Triplet<S>> {
        let mut out = Vec::with_capacity(self.nnz());
        match self {
            SparseMatrix::Csr(m) => {
                for row in 0..m.n_rows {
                    for k in m.rowptr[row]..m.rowptr[row + 1] {
                        out.push(Triplet { row, col: m.colind[k], value: m.values[k] });
                    }
                }
            }
            SparseMatrix::Coo(m) => out.extend_from_slice(&m.tuples),
            SparseMatrix::Bcsr(m) => {
                for brow in 0..m.n_block_rows() {
                    for b in m.browptr[brow]..m.browptr[brow + 1] {
                        push_block_triplets(
                            &mut out,
                            m.n_rows,
                            m.n_cols,
                            m.r,
                            m.c,
                            brow,
                            m.bcolind[b],
                            &m.bvalues[b * m.r * m.c..(b + 1) * m.r * m.c],
                        );
                    }
                }
            }
            SparseMatrix::Bcoo(m) => {
                for b in 0..m.n_blocks() {
                    push_block_triplets(
                        &mut out,
                        m.n_rows,
                        m.n_cols,
                        m.r,
                        m.c,
                        m.browind[b],
                        m.bcolind[b],
                        &m.bvalues[b * m.r * m.c..(b + 1) * m.r * m.c],
                    );
                }
            }
        }
        out.sort_by_key(|t| (t.row, t.col));
        out
    }

    /// Row-major dense expansion.
    pub fn to_dense(&self) -> Vec<S> {
        let mut dense = vec![S::zero(); self.n_rows() * self.n_cols()];
        for t in self.triplets() {
            dense[t.row * self.n_cols() + t.col] = t.value;
        }
        dense
    }

    /// Re-encodes the rows `range` as a fragment of the same format with
    /// local row indices. Blocks are re-formed relative to the fragment.
    pub fn slice_rows(&self, range: Range<usize>) -> Result<SparseMatrix<S>> {
        self.slice_tile(range, 0..self.n_cols())
    }

    /// Re-encodes the `rows x cols` sub-rectangle as a fragment of the same
    /// format with local indices.
    pub fn slice_tile(&self, rows: Range<usize>, cols: Range<usize>) -> Result<SparseMatrix<S>> {
        if rows.start > rows.end || cols.start > cols.end {
            return Err(Error::Range(format!(
                "inverted range: rows {rows:?}, cols {cols:?}"
            )));
        }
        if rows.end > self.n_rows() || cols.end > self.n_cols() {
            return Err(Error::Range(format!(
                "range rows {rows:?} cols {cols:?} outside {}x{}",
                self.n_rows(),
                self.n_cols()
            )));
        }
        let local: Vec<Triplet<S>> = self
            .triplets()
            .into_iter()
            .filter(|t| rows.contains(&t.row) && cols.contains(&t.col))
            .map(|t| Triplet { row: t.row - rows.start, col: t.col - cols.start, value: t.value })
            .collect();
        Ok(from_sorted_parts(
            rows.len(),
            cols.len(),
            &local,
            self.format(),
            self.block_dims(),
        ))
    }

    /// Dense text grid for debugging small matrices.
    pub fn dense_grid_string(&self) -> String {
        let dense = self.to_dense();
        let mut out = String::new();
        for row in 0..self.n_rows() {
            for col in 0..self.n_cols() {
                let v = dense[row * self.n_cols() + col];
                if col > 0 {
                    out.push(' ');
                }
                if v == S::zero() {
                    out.push('.');
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Builds a matrix of the given format directly from sorted local triplets.
/// Unlike [`TripletMatrix`], zero-sized fragments are allowed.
pub(crate) fn from_sorted_parts<S: Scalar>(
    n_rows: usize,
    n_cols: usize,
    entries: &[Triplet<S>],
    format: Format,
    block_dims: Option<(usize, usize)>,
) -> SparseMatrix<S> {
    let (r, c) = block_dims.unwrap_or(DEFAULT_BLOCK_DIMS);
    match format {
        Format::Csr => SparseMatrix::Csr(csr_from_sorted(n_rows, n_cols, entries)),
        Format::Coo => SparseMatrix::Coo(coo_from_sorted(n_rows, n_cols, entries)),
        Format::Bcsr => SparseMatrix::Bcsr(bcsr_from_sorted(n_rows, n_cols, entries, r, c)),
        Format::Bcoo => SparseMatrix::Bcoo(bcoo_from_sorted(n_rows, n_cols, entries, r, c)),
    }
}

#[allow(clippy::too_many_arguments)]
fn push_block_triplets<S: Scalar>(
    out: &mut Vec<Triplet<S>>,
    n_rows: usize,
    n_cols: usize,
    r: usize,
    c: usize,
    brow: usize,
    bcol: usize,
    payload: &[S],
) {
    for i in 0..r {
        let row = brow * r + i;
        if row >= n_rows {
            break;
        }
        for j in 0..c {
            let col = bcol * c + j;
            if col >= n_cols {
                break;
            }
            let v = payload[i * c + j];
            if v != S::zero() {
                out.push(Triplet { row, col, value: v });
            }
        }
    }
}
