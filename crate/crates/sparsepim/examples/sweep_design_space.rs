//! Sweep the design space on a regular and a scale-free matrix.
//!
//! The directions the sweep finds: 1D runs are bounded by broadcasting the
//! whole input vector to every core, so their best core count sits well
//! below the maximum; equally-sized 2D tiling amortizes the broadcast but
//! its kernel is bounded by the fullest tile, which punishes skewed
//! matrices.

use sparsepim::host::{make_input_vector, sweep};
use sparsepim::machine::{default_machine, Profile, TransferGranularity};
use sparsepim::matio::{generate_synthetic, SynthKind, TripletMatrix};
use sparsepim::scalar::Dtype;
use sparsepim::scheme::{kernel_by_name, SchemeId};

fn best_line(label: &str, m: &TripletMatrix<f64>) -> sparsepim::Result<()> {
    let cfg = default_machine(Profile::PimA);
    let x = make_input_vector::<f64>(m.n_cols(), 9);
    let schemes = [
        SchemeId::new(kernel_by_name("COO.nnz").unwrap(), Dtype::Fp64, TransferGranularity::Rank),
        SchemeId::new(kernel_by_name("DCOO").unwrap(), Dtype::Fp64, TransferGranularity::Rank),
    ];
    let table = sweep(
        m,
        &schemes,
        &[64, 128, 256, 512, 1024, 2048],
        &[2, 4, 8, 16, 32],
        &cfg,
        &x,
    )?;

    println!("{label}: {} grid points", table.rows.len());
    for prefix in ["COO.nnz", "DCOO"] {
        let best = table
            .rows
            .iter()
            .filter(|r| r.scheme.starts_with(prefix))
            .min_by(|a, b| a.total_s.partial_cmp(&b.total_s).unwrap())
            .unwrap();
        println!(
            "  best {:<12} cores {:>5} vertical {:>2}: total {:.3e} s ({:.4} GOp/s)",
            best.scheme, best.cores, best.vertical, best.total_s, best.gops
        );
    }
    let overall = table.best().unwrap();
    println!("  winner: {} at {} cores\n", overall.scheme, overall.cores);
    Ok(())
}

fn main() -> sparsepim::Result<()> {
    let regular =
        generate_synthetic(&SynthKind::UniformRandom { nnz: 28_000 }, 4096, 101)?.cast::<f64>();
    let scale_free =
        generate_synthetic(&SynthKind::PowerLaw { nnz: 28_000, exponent: 2.1 }, 4096, 202)?
            .cast::<f64>();
    best_line("regular synthetic (uniform)", &regular)?;
    best_line("scale-free synthetic (power-law)", &scale_free)?;
    Ok(())
}
