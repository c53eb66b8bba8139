//! Matrix Market coordinate-format reader and writer.
//!
//! Supports real, integer, and pattern fields with general or symmetric
//! symmetry. Symmetric inputs are expanded to full storage; pattern entries
//! get value 1. Complex matrices and dense (array) files are rejected.

use super::{Triplet, TripletMatrix};
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketField {
    Real,
    Integer,
    Pattern,
}

/// A parsed Matrix Market file plus ingestion metadata.
///
/// `declared_entries` is the entry count from the size line (pre-expansion);
/// `expanded_entries` counts nonzeros after symmetric mirroring.
#[derive(Debug, Clone)]
pub struct MarketMatrix {
    pub matrix: TripletMatrix<f64>,
    pub declared_entries: usize,
    pub expanded_entries: usize,
    pub symmetric: bool,
    pub field: MarketField,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses Matrix Market coordinate data from a reader.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<MarketMatrix> {
    let mut lines = reader.lines().enumerate();

    // Header line.
    let (idx, header) = match lines.next() {
        Some((i, l)) => (i + 1, l?),
        None => return Err(parse_err(1, "empty input")),
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5 || !tokens[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(parse_err(idx, "header must start with %%MatrixMarket"));
    }
    if !tokens[1].eq_ignore_ascii_case("matrix") {
        return Err(parse_err(idx, "object must be `matrix`"));
    }
    if !tokens[2].eq_ignore_ascii_case("coordinate") {
        return Err(parse_err(
            idx,
            format!("unsupported format `{}` (only `coordinate`)", tokens[2]),
        ));
    }
    let field = match tokens[3].to_ascii_lowercase().as_str() {
        "real" => MarketField::Real,
        "integer" => MarketField::Integer,
        "pattern" => MarketField::Pattern,
        "complex" => return Err(parse_err(idx, "complex field is not supported")),
        other => return Err(parse_err(idx, format!("unknown field `{other}`"))),
    };
    let symmetric = match tokens[4].to_ascii_lowercase().as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(parse_err(
                idx,
                format!("unsupported symmetry `{other}` (only general|symmetric)"),
            ))
        }
    };

    // Size line: first non-comment, non-empty line.
    let (mut n_rows, mut n_cols, mut declared) = (0usize, 0usize, 0usize);
    let mut size_seen = false;
    let mut size_line = 0usize;
    for (i, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(i + 1, "size line must be `rows cols entries`"));
        }
        n_rows = parts[0]
            .parse()
            .map_err(|_| parse_err(i + 1, "invalid row count"))?;
        n_cols = parts[1]
            .parse()
            .map_err(|_| parse_err(i + 1, "invalid column count"))?;
        declared = parts[2]
            .parse()
            .map_err(|_| parse_err(i + 1, "invalid entry count"))?;
        size_seen = true;
        size_line = i + 1;
        break;
    }
    if !size_seen {
        return Err(parse_err(1, "missing size line"));
    }
    if n_rows == 0 || n_cols == 0 {
        return Err(parse_err(size_line, "matrix dimensions must be positive"));
    }

    // Entry lines. Keep the source line of each entry so duplicate reports
    // can name it.
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::with_capacity(declared);
    for (i, line) in &mut lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let lineno = i + 1;
        let mut parts = trimmed.split_whitespace();
        let row: usize = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "missing row index"))?
            .parse()
            .map_err(|_| parse_err(lineno, "invalid row index"))?;
        let col: usize = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "missing column index"))?
            .parse()
            .map_err(|_| parse_err(lineno, "invalid column index"))?;
        let value = match field {
            MarketField::Pattern => 1.0,
            MarketField::Real | MarketField::Integer => parts
                .next()
                .ok_or_else(|| parse_err(lineno, "missing value"))?
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, "invalid value"))?,
        };
        if row == 0 || col == 0 {
            return Err(parse_err(lineno, "indices are 1-based; found 0"));
        }
        if row > n_rows || col > n_cols {
            return Err(parse_err(
                lineno,
                format!("entry ({row}, {col}) outside declared {n_rows}x{n_cols} bounds"),
            ));
        }
        entries.push((row - 1, col - 1, value, lineno));
    }
    if entries.len() != declared {
        return Err(parse_err(
            size_line,
            format!("declared {} entries but found {}", declared, entries.len()),
        ));
    }

    // Duplicate coordinates are a hard error, before and after expansion.
    let mut sorted: Vec<(usize, usize, usize)> =
        entries.iter().map(|&(r, c, _, l)| (r, c, l)).collect();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            return Err(parse_err(
                w[1].2,
                format!("duplicate entry at ({}, {})", w[0].0 + 1, w[0].1 + 1),
            ));
        }
    }

    let mut triplets: Vec<Triplet<f64>> = Vec::with_capacity(entries.len() * 2);
    for &(r, c, v, lineno) in &entries {
        triplets.push(Triplet { row: r, col: c, value: v });
        if symmetric && r != c {
            // Mirror off-diagonal entries only; the mirror must not collide
            // with an explicitly stored entry.
            if sorted.binary_search_by_key(&(c, r), |&(a, b, _)| (a, b)).is_ok() {
                return Err(parse_err(
                    lineno,
                    format!(
                        "symmetric file stores both ({}, {}) and its mirror",
                        r + 1,
                        c + 1
                    ),
                ));
            }
            triplets.push(Triplet { row: c, col: r, value: v });
        }
    }
    let expanded = triplets.len();
    let matrix = TripletMatrix::from_entries(n_rows, n_cols, triplets)?;
    Ok(MarketMatrix {
        matrix,
        declared_entries: declared,
        expanded_entries: expanded,
        symmetric,
        field,
    })
}

/// Parses Matrix Market data held in a string.
pub fn parse_matrix_market_str(text: &str) -> Result<MarketMatrix> {
    parse_matrix_market(text.as_bytes())
}

/// Writes a triplet matrix as `coordinate real general`, 1-based indices.
pub fn write_matrix_market<W: Write>(m: &TripletMatrix<f64>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for t in m.entries() {
        writeln!(w, "{} {} {}", t.row + 1, t.col + 1, t.value)?;
    }
    Ok(())
}
