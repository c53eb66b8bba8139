//! The analytic machine model: profiles, rooflines, and transfer padding.

use sparsepim::machine::{
    default_machine, kernel_time_estimate, plan_transfer, transfer_time, Direction, Profile,
    TransferGranularity,
};
use sparsepim::scalar::Dtype;

fn main() -> sparsepim::Result<()> {
    for profile in [Profile::PimA, Profile::PimB] {
        let cfg = default_machine(profile);
        println!(
            "{}: {} cores at {:.0} MHz, bank {:.0} MB/s",
            profile.name(),
            cfg.n_cores,
            cfg.core_frequency / 1e6,
            cfg.bank_bandwidth / 1e6
        );
        for dtype in Dtype::ALL {
            println!(
                "  {:>5}: {:>7.3} MOps/core -> {:>7.3} GOps aggregate",
                dtype.name(),
                cfg.mul_throughput.get(dtype) / 1e6,
                cfg.peak_compute(dtype) / 1e9
            );
        }
    }

    let cfg = default_machine(Profile::PimA);

    // Roofline: a million fp64 multiply-accumulates on one core.
    let compute_bound = kernel_time_estimate(1_000_000, 0, Dtype::Fp64, &cfg);
    let memory_bound = kernel_time_estimate(1_000, 700_000_000, Dtype::Fp64, &cfg);
    println!("\ncompute-bound kernel estimate: {compute_bound:.3} s");
    println!("memory-bound kernel estimate:  {memory_bound:.3} s");

    // Padding semantics: unequal sizes within one rank pad to the maximum.
    let sizes = [40usize, 120, 512, 64];
    println!("\ntransfer of per-core sizes {sizes:?}:");
    for granularity in
        [TransferGranularity::Coarse, TransferGranularity::Rank, TransferGranularity::Bank]
    {
        let plan = plan_transfer(&sizes, Direction::BanksToHost, granularity, &cfg)?;
        println!(
            "  {:>6}: {} useful / {} moved bytes (padding {:.3}), {:.3e} s",
            granularity.name(),
            plan.total_useful_bytes(),
            plan.total_padded_bytes(),
            plan.padding_fraction(),
            transfer_time(&plan, &cfg)
        );
    }
    Ok(())
}
