//! Encode one small matrix in all four compressed formats and inspect them.

use sparsepim::formats::{to_bcoo, to_bcsr, to_coo, to_csr, SparseMatrix};
use sparsepim::matio::{Triplet, TripletMatrix};

fn main() -> sparsepim::Result<()> {
    // 8x8 with nonzeros confined to two 4x4 tiles.
    let entries = vec![
        Triplet { row: 0, col: 1, value: 2i32 },
        Triplet { row: 1, col: 0, value: 1 },
        Triplet { row: 2, col: 3, value: 5 },
        Triplet { row: 3, col: 2, value: 4 },
        Triplet { row: 5, col: 6, value: 7 },
        Triplet { row: 6, col: 5, value: 3 },
    ];
    let m = TripletMatrix::from_entries(8, 8, entries)?;

    let csr = to_csr(&m);
    println!("CSR rowptr: {:?}", csr.rowptr);
    println!("CSR colind: {:?}", csr.colind);

    let coo = to_coo(&m);
    println!("COO tuples: {} entries, row-sorted", coo.tuples.len());

    let bcsr = to_bcsr(&m, 4, 4)?;
    println!(
        "BCSR 4x4: {} blocks of {} possible, fill ratio {:.3}",
        bcsr.n_blocks(),
        (8 / 4) * (8 / 4),
        bcsr.fill_ratio()
    );
    println!("BCSR browptr: {:?}, bcolind: {:?}", bcsr.browptr, bcsr.bcolind);

    let bcoo = to_bcoo(&m, 4, 4)?;
    println!("BCOO blocks at (browind, bcolind): {:?}", bcoo
        .browind
        .iter()
        .zip(&bcoo.bcolind)
        .collect::<Vec<_>>());

    // Every format reconstructs the same dense matrix.
    let dense = m.to_dense();
    assert_eq!(SparseMatrix::Csr(csr.clone()).to_dense(), dense);
    assert_eq!(SparseMatrix::Bcoo(bcoo).to_dense(), dense);
    println!("\ndense reconstruction identical across formats");

    // Fragments re-encode with local indices.
    let top = SparseMatrix::Csr(csr).slice_rows(0..4)?;
    println!("\nrows 0..4 as a CSR fragment:\n{}", top.dense_grid_string());
    Ok(())
}
