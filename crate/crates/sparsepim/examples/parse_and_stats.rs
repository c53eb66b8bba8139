//! Parse a Matrix Market file and print its sparsity statistics.
//!
//! Usage: `cargo run --example parse_and_stats [path.mtx]`
//! Without an argument, a small embedded symmetric matrix is used.

use sparsepim::matio::{compute_stats, parse_matrix_market, parse_matrix_market_str};
use std::fs::File;
use std::io::BufReader;

const SAMPLE: &str = "\
%%MatrixMarket matrix coordinate real symmetric
% embedded sample: 5x5, lower triangle stored
5 5 7
1 1 2.5
2 1 -1
2 2 3
3 3 1
4 2 0.5
5 4 -2
5 5 4
";

fn main() -> sparsepim::Result<()> {
    let parsed = match std::env::args().nth(1) {
        Some(path) => {
            println!("reading {path}");
            parse_matrix_market(BufReader::new(File::open(path)?))?
        }
        None => {
            println!("no path given; using the embedded sample");
            parse_matrix_market_str(SAMPLE)?
        }
    };

    if parsed.symmetric {
        println!(
            "symmetric file: {} stored entries expanded to {} nonzeros",
            parsed.declared_entries, parsed.expanded_entries
        );
    }

    let stats = compute_stats(&parsed.matrix)?;
    println!("shape:        {} x {}", stats.n_rows, stats.n_cols);
    println!("nnz:          {}", stats.nnz);
    println!("sparsity:     {:e}", stats.sparsity);
    println!("nnz-r-std:    {:.3}", stats.nnz_r_std);
    println!("nnz-c-std:    {:.3}", stats.nnz_c_std);
    println!("max row nnz:  {}", stats.max_row_nnz);
    println!("empty rows:   {}", stats.empty_row_count);
    Ok(())
}
