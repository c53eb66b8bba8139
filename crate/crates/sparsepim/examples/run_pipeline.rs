//! One end-to-end simulated run: load, kernel, retrieve, merge.

use sparsepim::host::{make_input_vector, reference_spmv, run_pipeline};
use sparsepim::machine::{default_machine, Profile, TransferGranularity};
use sparsepim::matio::{generate_synthetic, SynthKind};
use sparsepim::scalar::Dtype;
use sparsepim::scheme::{parse_scheme_name, SyncMode};

fn main() -> sparsepim::Result<()> {
    let m = generate_synthetic(&SynthKind::UniformRandom { nnz: 40_000 }, 8192, 3)?
        .cast::<f32>();
    let x = make_input_vector::<f32>(8192, 3);

    let mut cfg = default_machine(Profile::PimA);
    cfg.n_cores = 512;
    let scheme = parse_scheme_name("COO.nnz", Dtype::Fp32, TransferGranularity::Rank)?
        .with_sync(SyncMode::Lf)?;

    let report = run_pipeline(&m, &scheme, 1, &cfg, &x)?;
    let p = report.phase_seconds;
    println!("scheme {} on {} cores", report.scheme_name, report.n_cores);
    println!("load     {:>12.6e} s  ({} B useful)", p.load, report.load_transfer.useful_bytes);
    println!("kernel   {:>12.6e} s", p.kernel);
    println!("retrieve {:>12.6e} s  ({} B useful)", p.retrieve, report.retrieve_transfer.useful_bytes);
    println!("merge    {:>12.6e} s  ({} additions)", p.merge, report.merge_additions);
    println!("total    {:>12.6e} s  -> {:.4} GOp/s", p.total(), report.gops);
    println!(
        "balance: core nnz ratio {:.3}, worst tasklet nnz ratio {:.3}",
        report.balance.core_nnz_ratio, report.balance.tasklet_nnz_ratio
    );

    // The functional result matches the dense reference.
    let expected = reference_spmv(&m, &x);
    let max_err = report
        .y
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs() as f64)
        .fold(0.0, f64::max);
    println!("max |y - reference| = {max_err:e}");
    Ok(())
}
