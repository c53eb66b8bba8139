//! Tile a matrix with the three 2D grid schemes and study retrieve padding.
//!
//! Equally-sized grids have uniform tiles, so parallel retrieve transfers
//! need no padding. Equally-wide and variable-sized grids balance nonzeros,
//! so tile heights vary and every parallel transfer pads to the widest
//! member of its group; the padding fraction shrinks as the granularity
//! becomes finer.

use sparsepim::machine::{
    default_machine, plan_transfer, Direction, Profile, TransferGranularity,
};
use sparsepim::matio::{generate_synthetic, SynthKind};
use sparsepim::part2d::plan_2d;
use sparsepim::scheme::kernel_by_name;

fn main() -> sparsepim::Result<()> {
    let m = generate_synthetic(&SynthKind::PowerLaw { nnz: 12_000, exponent: 2.1 }, 2048, 31)?
        .cast::<i32>();
    let cfg = default_machine(Profile::PimA);
    let (cores, vertical) = (256, 8);

    println!("matrix 2048 x 2048, nnz {}, {cores} cores, {vertical} vertical partitions\n", m.nnz());
    for name in ["DCOO", "RBDCOO", "BDCOO"] {
        let kernel = kernel_by_name(name).unwrap();
        let plan = plan_2d(&m, kernel, cores, vertical, (4, 4))?;
        let nnz: Vec<usize> = plan.tiles.iter().map(|t| t.nnz).collect();
        let heights = plan.merge_requirements();
        let retrieve: Vec<usize> = heights.iter().map(|&h| h * 4).collect();
        print!(
            "{name:<8} tile nnz max/mean {:>5}/{:<7.1} heights max/mean {:>5}/{:<7.1} padding:",
            nnz.iter().max().unwrap(),
            m.nnz() as f64 / cores as f64,
            heights.iter().max().unwrap(),
            heights.iter().sum::<usize>() as f64 / cores as f64
        );
        for granularity in
            [TransferGranularity::Coarse, TransferGranularity::Rank, TransferGranularity::Bank]
        {
            let p = plan_transfer(&retrieve, Direction::BanksToHost, granularity, &cfg)?;
            print!(" {}={:.3}", granularity.name(), p.padding_fraction());
        }
        println!();
    }

    // Grid geometry exports as JSON for heatmap-style postprocessing.
    let plan = plan_2d(&m, kernel_by_name("DCOO").unwrap(), 16, 4, (4, 4))?;
    let summary = plan.grid_summary();
    println!(
        "\nDCOO 16-core grid (first 4 tiles of {}):\n{}",
        summary.tiles.len(),
        serde_json::to_string_pretty(&summary.tiles[..4]).unwrap()
    );
    Ok(())
}
