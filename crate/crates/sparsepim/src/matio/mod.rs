//! Matrix ingestion, synthetic matrix generation, and sparsity statistics.

mod market;
mod synth;

pub use market::{parse_matrix_market, parse_matrix_market_str, write_matrix_market, MarketField, MarketMatrix};
pub use synth::{generate_synthetic, SynthKind};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::Serialize;

/// One nonzero of a matrix in coordinate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triplet<S> {
    pub row: usize,
    pub col: usize,
    pub value: S,
}

/// The raw nonzero set of a sparse matrix, before any format encoding.
///
/// Always canonical: entries sorted by `(row, col)`, indices in range, no
/// duplicate coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix<S> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Triplet<S>>,
}

impl<S: Scalar> TripletMatrix<S> {
    /// Builds a canonical triplet matrix. Sorts the entries, validates index
    /// ranges, and rejects duplicate coordinates.
    pub fn from_entries(
        n_rows: usize,
        n_cols: usize,
        mut entries: Vec<Triplet<S>>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Generate("matrix dimensions must be positive".into()));
        }
        for t in &entries {
            if t.row >= n_rows || t.col >= n_cols {
                return Err(Error::Generate(format!(
                    "entry ({}, {}) outside {}x{} matrix",
                    t.row, t.col, n_rows, n_cols
                )));
            }
        }
        entries.sort_by_key(|t| (t.row, t.col));
        for w in entries.windows(2) {
            if w[0].row == w[1].row && w[0].col == w[1].col {
                return Err(Error::Generate(format!(
                    "duplicate entry at ({}, {})",
                    w[0].row, w[0].col
                )));
            }
        }
        Ok(Self { n_rows, n_cols, entries })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Triplet<S>] {
        &self.entries
    }

    /// Number of nonzeros in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_rows];
        for t in &self.entries {
            counts[t.row] += 1;
        }
        counts
    }

    /// Number of nonzeros in each column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_cols];
        for t in &self.entries {
            counts[t.col] += 1;
        }
        counts
    }

    /// Re-types the values; positions are untouched. Exact for float targets
    /// and for the small integer values the generators produce; fractional
    /// values truncate toward zero for integer targets.
    pub fn cast<T: Scalar>(&self) -> TripletMatrix<T> {
        TripletMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self
                .entries
                .iter()
                .map(|t| Triplet { row: t.row, col: t.col, value: T::from_f64(t.value.to_f64()) })
                .collect(),
        }
    }

    /// Row-major dense expansion. Intended for small matrices and reference
    /// computations.
    pub fn to_dense(&self) -> Vec<S> {
        let mut dense = vec![S::zero(); self.n_rows * self.n_cols];
        for t in &self.entries {
            dense[t.row * self.n_cols + t.col] = t.value;
        }
        dense
    }
}

/// Sparsity-structure statistics of a triplet matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixStats {
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    /// NNZ / (rows x cols).
    pub sparsity: f64,
    /// Population standard deviation of nonzeros per row.
    pub nnz_r_std: f64,
    /// Population standard deviation of nonzeros per column.
    pub nnz_c_std: f64,
    pub max_row_nnz: usize,
    pub empty_row_count: usize,
}

/// Computes exact statistics over the nonzero structure.
pub fn compute_stats<S: Scalar>(m: &TripletMatrix<S>) -> Result<MatrixStats> {
    if m.nnz() == 0 {
        return Err(Error::Stats("matrix has no nonzero elements".into()));
    }
    let row_counts = m.row_counts();
    let col_counts = m.col_counts();
    Ok(MatrixStats {
        n_rows: m.n_rows,
        n_cols: m.n_cols,
        nnz: m.nnz(),
        sparsity: m.nnz() as f64 / (m.n_rows as f64 * m.n_cols as f64),
        nnz_r_std: population_std(&row_counts),
        nnz_c_std: population_std(&col_counts),
        max_row_nnz: row_counts.iter().copied().max().unwrap_or(0),
        empty_row_count: row_counts.iter().filter(|&&c| c == 0).count(),
    })
}

fn population_std(counts: &[usize]) -> f64 {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    var.sqrt()
}
