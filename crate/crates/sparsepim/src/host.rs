//! End-to-end orchestration of the four-phase pipeline: load the input
//! vector into the banks, run the kernel on every core, retrieve partial
//! results, and merge them on the host.
//!
//! Phases are strictly sequential and the merge applies partials in
//! ascending core order, so reports are reproducible regardless of how many
//! host workers fan out the core executions. The time model never influences
//! computed values.

use crate::error::{Error, Result};
use crate::exec::{estimate_imbalance, run_core, schedule_threads, CoreCounters};
use crate::formats::{encode, SparseMatrix};
use crate::machine::{
    kernel_time_estimate, plan_transfer, transfer_time, Direction, MachineConfig, TransferPlan,
};
use crate::matio::TripletMatrix;
use crate::part1d::plan_1d;
use crate::part2d::plan_2d;
use crate::scalar::Scalar;
use crate::scheme::{PartKind, SchemeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::ops::Range;

/// Wall-clock model of the four phases, seconds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseSeconds {
    pub load: f64,
    pub kernel: f64,
    pub retrieve: f64,
    pub merge: f64,
}

impl PhaseSeconds {
    pub fn total(&self) -> f64 {
        self.load + self.kernel + self.retrieve + self.merge
    }
}

/// Byte accounting of one transfer direction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferStats {
    pub useful_bytes: u64,
    pub padded_bytes: u64,
    pub padding_fraction: f64,
}

impl TransferStats {
    fn from_plan(plan: &TransferPlan) -> Self {
        TransferStats {
            useful_bytes: plan.total_useful_bytes(),
            padded_bytes: plan.total_padded_bytes(),
            padding_fraction: plan.padding_fraction(),
        }
    }
}

/// Work-balance rollup across cores and tasklets.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BalanceReport {
    pub core_nnz_max: u64,
    pub core_nnz_mean: f64,
    /// Max over mean nnz across cores.
    pub core_nnz_ratio: f64,
    /// Worst tasklet-level nnz ratio over all cores.
    pub tasklet_nnz_ratio: f64,
    /// Worst tasklet-level row ratio over all cores.
    pub tasklet_rows_ratio: f64,
}

/// Everything one simulated run produces.
#[derive(Debug, Clone, Serialize)]
pub struct ExecutionReport<S> {
    pub scheme: SchemeId,
    pub scheme_name: String,
    pub n_cores: usize,
    pub n_vertical: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub y: Vec<S>,
    pub phase_seconds: PhaseSeconds,
    pub load_transfer: TransferStats,
    pub retrieve_transfer: TransferStats,
    pub merge_additions: u64,
    /// Throughput over the end-to-end time, counting one multiply and one
    /// add per nonzero.
    pub gops: f64,
    pub balance: BalanceReport,
    pub core_counters: Vec<CoreCounters>,
}

impl<S: Serialize> ExecutionReport<S> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Brute-force dense SpMV over the raw triplets, in the canonical reduction
/// order (ascending column within a row, rows ascending). This is the
/// functional reference the `verify` command checks kernels against; no
/// kernel goes through it.
pub fn reference_spmv<S: Scalar>(m: &TripletMatrix<S>, x: &[S]) -> Vec<S> {
    let mut y = vec![S::zero(); m.n_rows()];
    for t in m.entries() {
        y[t.row] = y[t.row].mul_acc(t.value, x[t.col]);
    }
    y
}

/// Deterministic input vector with small integer entries, exact in every
/// element type.
pub fn make_input_vector<S: Scalar>(n: usize, seed: u64) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1234_abcd_9876);
    (0..n)
        .map(|_| {
            let v = rng.gen_range(1..=4i64);
            S::from_small_int(if rng.gen_bool(0.5) { -v } else { v })
        })
        .collect()
}

/// Sums per-core partials into the final vector, in ascending core order.
///
/// Each partial covers a contiguous output range; together they must cover
/// every output index at least once. Returns the vector and the number of
/// additions performed (indices covered more than once).
pub fn merge_partials<S: Scalar>(
    n_rows: usize,
    partials: &[(Range<usize>, Vec<S>)],
) -> Result<(Vec<S>, u64)> {
    let mut y = vec![S::zero(); n_rows];
    let mut covers = vec![0u32; n_rows];
    for (range, values) in partials {
        if range.len() != values.len() {
            return Err(Error::Merge(format!(
                "partial of {} values claims range {range:?}",
                values.len()
            )));
        }
        if range.end > n_rows {
            return Err(Error::Merge(format!("range {range:?} outside output of {n_rows}")));
        }
        for (i, &v) in range.clone().zip(values.iter()) {
            y[i] = y[i].add(v);
            covers[i] += 1;
        }
    }
    if let Some(hole) = covers.iter().position(|&c| c == 0) {
        return Err(Error::Merge(format!("output index {hole} not covered by any partial")));
    }
    let additions = covers.iter().map(|&c| (c - 1) as u64).sum();
    Ok((y, additions))
}

struct CoreWork<S> {
    fragment: SparseMatrix<S>,
    input_range: Range<usize>,
    output_range: Range<usize>,
}

/// Runs one scheme end to end and assembles the report.
///
/// `n_vertical` selects the vertical partition count for 2D kernels and is
/// ignored for 1D kernels.
pub fn run_pipeline<S: Scalar>(
    m: &TripletMatrix<S>,
    scheme: &SchemeId,
    n_vertical: usize,
    cfg: &MachineConfig,
    x: &[S],
) -> Result<ExecutionReport<S>> {
    scheme.validate()?;
    cfg.validate()?;
    if x.len() != m.n_cols() {
        return Err(Error::Exec(format!(
            "input vector has {} elements but the matrix has {} columns",
            x.len(),
            m.n_cols()
        )));
    }
    if S::DTYPE != scheme.dtype {
        return Err(Error::Scheme(format!(
            "scheme is typed {} but the matrix elements are {}",
            scheme.dtype,
            S::DTYPE
        )));
    }

    // Partition.
    let (works, n_vertical) = match scheme.kernel.partitioning {
        PartKind::OneD => {
            let enc = encode(m, scheme.kernel.format, Some(scheme.block_dims))?;
            let plan = plan_1d(&enc, scheme.kernel, cfg.n_cores)?;
            let works: Vec<CoreWork<S>> = plan
                .cores
                .into_iter()
                .map(|c| CoreWork {
                    fragment: c.fragment,
                    input_range: c.input_range,
                    output_range: c.output_range,
                })
                .collect();
            (works, 1)
        }
        _ => {
            let plan = plan_2d(m, scheme.kernel, cfg.n_cores, n_vertical, scheme.block_dims)?;
            let works: Vec<CoreWork<S>> = plan
                .tiles
                .into_iter()
                .map(|t| CoreWork {
                    fragment: t.fragment,
                    input_range: t.col_range,
                    output_range: t.row_range,
                })
                .collect();
            (works, n_vertical)
        }
    };

    let width = S::DTYPE.width();

    // Load phase: input-vector slices into every participating bank.
    let load_sizes: Vec<usize> = works.iter().map(|w| w.input_range.len() * width).collect();
    let load_plan =
        plan_transfer(&load_sizes, Direction::HostToBanks, scheme.granularity, cfg)?;
    let load_seconds = transfer_time(&load_plan, cfg);

    // Kernel phase: every core independently; results keyed by core index.
    let tasklets = cfg.tasklets_per_core;
    let outcomes: Result<Vec<(Vec<S>, CoreCounters)>> = works
        .par_iter()
        .map(|w| {
            let schedule = schedule_threads(&w.fragment, scheme.thread_balance, tasklets)?;
            run_core(&w.fragment, &x[w.input_range.clone()], &schedule, scheme.sync)
        })
        .collect();
    let outcomes = outcomes?;
    let kernel_seconds = outcomes
        .iter()
        .map(|(_, c)| kernel_time_estimate(c.compute_ops, c.total_mram_bytes(), S::DTYPE, cfg))
        .fold(0.0f64, f64::max);

    // Retrieve phase: per-core partial outputs back to the host.
    let retrieve_sizes: Vec<usize> =
        works.iter().map(|w| w.output_range.len() * width).collect();
    let retrieve_plan =
        plan_transfer(&retrieve_sizes, Direction::BanksToHost, scheme.granularity, cfg)?;
    let retrieve_seconds = transfer_time(&retrieve_plan, cfg);

    // Merge phase on the host.
    let partials: Vec<(Range<usize>, Vec<S>)> = works
        .iter()
        .zip(outcomes.iter())
        .map(|(w, (y, _))| (w.output_range.clone(), y.clone()))
        .collect();
    let (y, merge_additions) = merge_partials(m.n_rows(), &partials)?;
    let merge_seconds = merge_additions as f64 / cfg.host_merge_throughput;

    let phase_seconds = PhaseSeconds {
        load: load_seconds,
        kernel: kernel_seconds,
        retrieve: retrieve_seconds,
        merge: merge_seconds,
    };
    let core_counters: Vec<CoreCounters> = outcomes.into_iter().map(|(_, c)| c).collect();
    let balance = balance_report(&core_counters);
    let total = phase_seconds.total();
    let gops = if total > 0.0 { 2.0 * m.nnz() as f64 / total / 1e9 } else { 0.0 };

    Ok(ExecutionReport {
        scheme: *scheme,
        scheme_name: scheme.display_name(),
        n_cores: cfg.n_cores,
        n_vertical,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        nnz: m.nnz(),
        y,
        phase_seconds,
        load_transfer: TransferStats::from_plan(&load_plan),
        retrieve_transfer: TransferStats::from_plan(&retrieve_plan),
        merge_additions,
        gops,
        balance,
        core_counters,
    })
}

fn balance_report(counters: &[CoreCounters]) -> BalanceReport {
    let n = counters.len().max(1) as f64;
    let total: u64 = counters.iter().map(|c| c.nnz).sum();
    let max = counters.iter().map(|c| c.nnz).max().unwrap_or(0);
    let mean = total as f64 / n;
    let (mut worst_nnz, mut worst_rows) = (1.0f64, 1.0f64);
    for c in counters {
        let m = estimate_imbalance(c);
        worst_nnz = worst_nnz.max(m.nnz_ratio);
        worst_rows = worst_rows.max(m.rows_ratio);
    }
    BalanceReport {
        core_nnz_max: max,
        core_nnz_mean: mean,
        core_nnz_ratio: if total == 0 { 1.0 } else { max as f64 / mean },
        tasklet_nnz_ratio: worst_nnz,
        tasklet_rows_ratio: worst_rows,
    }
}

/// One sweep grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub scheme: String,
    pub dtype: String,
    pub cores: usize,
    pub vertical: usize,
    pub load_s: f64,
    pub kernel_s: f64,
    pub retrieve_s: f64,
    pub merge_s: f64,
    pub total_s: f64,
    pub load_padding_fraction: f64,
    pub retrieve_padding_fraction: f64,
    pub gops: f64,
}

/// Exhaustive grid evaluation result.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Best row: highest throughput; ties go to fewer cores, then fewer
    /// vertical partitions.
    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().min_by(|a, b| {
            b.gops
                .partial_cmp(&a.gops)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cores.cmp(&b.cores))
                .then(a.vertical.cmp(&b.vertical))
                .then(a.scheme.cmp(&b.scheme))
        })
    }

    /// Versioned CSV rendering (comment line, header, sorted rows).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# sparsepim sweep v1\n");
        out.push_str(
            "scheme,dtype,cores,vertical,load_s,kernel_s,retrieve_s,merge_s,total_s,\
             load_padding_fraction,retrieve_padding_fraction,gops\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.scheme,
                r.dtype,
                r.cores,
                r.vertical,
                r.load_s,
                r.kernel_s,
                r.retrieve_s,
                r.merge_s,
                r.total_s,
                r.load_padding_fraction,
                r.retrieve_padding_fraction,
                r.gops
            );
        }
        out
    }
}

/// Runs every scheme over every core count (and vertical count, for 2D
/// kernels) and reports the table plus the best grid point. Grid points
/// whose vertical count does not divide the core count are skipped.
pub fn sweep<S: Scalar>(
    m: &TripletMatrix<S>,
    schemes: &[SchemeId],
    core_counts: &[usize],
    vertical_counts: &[usize],
    cfg: &MachineConfig,
    x: &[S],
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    for scheme in schemes {
        let verticals: Vec<usize> = if scheme.kernel.partitioning == PartKind::OneD {
            vec![1]
        } else {
            vertical_counts.to_vec()
        };
        for &cores in core_counts {
            for &vertical in &verticals {
                if vertical == 0 || vertical > cores || cores % vertical != 0 {
                    continue;
                }
                let mut point_cfg = cfg.clone();
                point_cfg.n_cores = cores;
                let report = run_pipeline(m, scheme, vertical, &point_cfg, x)?;
                rows.push(SweepRow {
                    scheme: report.scheme_name.clone(),
                    dtype: scheme.dtype.name().to_string(),
                    cores,
                    vertical,
                    load_s: report.phase_seconds.load,
                    kernel_s: report.phase_seconds.kernel,
                    retrieve_s: report.phase_seconds.retrieve,
                    merge_s: report.phase_seconds.merge,
                    total_s: report.phase_seconds.total(),
                    load_padding_fraction: report.load_transfer.padding_fraction,
                    retrieve_padding_fraction: report.retrieve_transfer.padding_fraction,
                    gops: report.gops,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.cores.cmp(&b.cores))
            .then(a.vertical.cmp(&b.vertical))
    });
    Ok(SweepTable { rows })
}
