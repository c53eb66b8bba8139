//! Parameterized model of the simulated near-bank PIM system.
//!
//! Time is modeled analytically: per-core kernel time is a roofline over
//! multiply throughput and local bank bandwidth, and host transfers follow
//! the parallel-transfer padding rules (all banks in one parallel transfer
//! move the same number of bytes).

use crate::error::{Error, Result};
use crate::scalar::Dtype;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

/// Built-in machine profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    PimA,
    PimB,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::PimA => "pim-A",
            Profile::PimB => "pim-B",
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pim-a" | "pima" | "a" => Ok(Profile::PimA),
            "pim-b" | "pimb" | "b" => Ok(Profile::PimB),
            other => Err(format!("unknown machine profile `{other}` (pim-A|pim-B)")),
        }
    }
}

/// Multiply throughput per data type, in operations per second per core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MulThroughput {
    pub int8: f64,
    pub int16: f64,
    pub int32: f64,
    pub int64: f64,
    pub fp32: f64,
    pub fp64: f64,
}

impl MulThroughput {
    pub fn get(&self, dtype: Dtype) -> f64 {
        match dtype {
            Dtype::Int8 => self.int8,
            Dtype::Int16 => self.int16,
            Dtype::Int32 => self.int32,
            Dtype::Int64 => self.int64,
            Dtype::Fp32 => self.fp32,
            Dtype::Fp64 => self.fp64,
        }
    }
}

/// The simulated PIM system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineConfig {
    /// Number of PIM cores (each owning one DRAM bank).
    pub n_cores: usize,
    /// Cores sharing one parallel-transfer operation.
    pub cores_per_rank: usize,
    /// Software threads per core.
    pub tasklets_per_core: usize,
    /// Per-core scratchpad capacity in bytes.
    pub scratchpad_bytes: usize,
    /// Per-core DRAM bank capacity in bytes.
    pub dram_bank_bytes: usize,
    /// Smallest DMA transaction size; transfer sizes are multiples of this.
    pub dma_min_bytes: usize,
    /// Largest single DMA transaction size.
    pub dma_max_bytes: usize,
    /// Multiply throughput per core, per data type.
    pub mul_throughput: MulThroughput,
    /// Per-core DRAM bank bandwidth, bytes/second.
    pub bank_bandwidth: f64,
    /// Host bus bandwidth serving one rank, bytes/second. A calibration
    /// parameter, not a published constant.
    pub bus_bandwidth_per_rank: f64,
    /// Core clock, Hz.
    pub core_frequency: f64,
    /// Host-side merge rate, merged elements/second. Calibration parameter.
    pub host_merge_throughput: f64,
}

/// Returns the published parameter set for a profile.
pub fn default_machine(profile: Profile) -> MachineConfig {
    let common = |n_cores, freq, mul, bank| MachineConfig {
        n_cores,
        cores_per_rank: 64,
        tasklets_per_core: 16,
        scratchpad_bytes: 64 * 1024,
        dram_bank_bytes: 64 * 1024 * 1024,
        dma_min_bytes: 8,
        dma_max_bytes: 2048,
        mul_throughput: mul,
        bank_bandwidth: bank,
        bus_bandwidth_per_rank: 6.7e9,
        core_frequency: freq,
        host_merge_throughput: 1.0e8,
    };
    match profile {
        Profile::PimA => common(
            2528,
            350.0e6,
            MulThroughput {
                int8: 12.941e6,
                int16: 10.524e6,
                int32: 8.861e6,
                int64: 2.381e6,
                fp32: 1.847e6,
                fp64: 0.517e6,
            },
            700.0e6,
        ),
        Profile::PimB => common(
            2048,
            425.0e6,
            MulThroughput {
                int8: 15.656e6,
                int16: 12.721e6,
                int32: 10.732e6,
                int64: 2.888e6,
                fp32: 2.259e6,
                fp64: 0.631e6,
            },
            850.0e6,
        ),
    }
}

impl MachineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cores == 0 {
            return Err(Error::Machine("n_cores must be positive".into()));
        }
        if self.cores_per_rank == 0 {
            return Err(Error::Machine("cores_per_rank must be positive".into()));
        }
        if self.tasklets_per_core == 0 || self.tasklets_per_core > 24 {
            return Err(Error::Machine(format!(
                "tasklets_per_core must be in [1, 24], got {}",
                self.tasklets_per_core
            )));
        }
        if self.dma_min_bytes == 0 || !self.dma_min_bytes.is_multiple_of(8) {
            return Err(Error::Machine("dma_min_bytes must be a positive multiple of 8".into()));
        }
        if !self.dma_max_bytes.is_multiple_of(8) || self.dma_max_bytes < self.dma_min_bytes {
            return Err(Error::Machine(
                "dma_max_bytes must be a multiple of 8 and at least dma_min_bytes".into(),
            ));
        }
        for (label, v) in [
            ("bank_bandwidth", self.bank_bandwidth),
            ("bus_bandwidth_per_rank", self.bus_bandwidth_per_rank),
            ("core_frequency", self.core_frequency),
            ("host_merge_throughput", self.host_merge_throughput),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Machine(format!("{label} must be positive")));
            }
        }
        Ok(())
    }

    /// Number of ranks spanned by `cores` participating cores.
    pub fn rank_count(&self, cores: usize) -> usize {
        cores.div_ceil(self.cores_per_rank)
    }

    /// Aggregate multiply throughput, ops/second.
    pub fn peak_compute(&self, dtype: Dtype) -> f64 {
        self.n_cores as f64 * self.mul_throughput.get(dtype)
    }

    /// Aggregate local-bank bandwidth, bytes/second.
    pub fn aggregate_bank_bandwidth(&self) -> f64 {
        self.n_cores as f64 * self.bank_bandwidth
    }

    /// Applies key/value overrides from a TOML config file.
    pub fn apply_overrides_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_overrides_str(&text)
    }

    pub fn apply_overrides_str(&mut self, text: &str) -> Result<()> {
        let overrides: MachineOverrides =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        overrides.apply(self);
        self.validate()
    }
}

/// Partial machine override, as read from a config file. Every field of
/// [`MachineConfig`] can be overridden.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineOverrides {
    n_cores: Option<usize>,
    cores_per_rank: Option<usize>,
    tasklets_per_core: Option<usize>,
    scratchpad_bytes: Option<usize>,
    dram_bank_bytes: Option<usize>,
    dma_min_bytes: Option<usize>,
    dma_max_bytes: Option<usize>,
    mul_throughput: Option<MulThroughputOverrides>,
    bank_bandwidth: Option<f64>,
    bus_bandwidth_per_rank: Option<f64>,
    core_frequency: Option<f64>,
    host_merge_throughput: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MulThroughputOverrides {
    int8: Option<f64>,
    int16: Option<f64>,
    int32: Option<f64>,
    int64: Option<f64>,
    fp32: Option<f64>,
    fp64: Option<f64>,
}

impl MachineOverrides {
    fn apply(&self, cfg: &mut MachineConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            n_cores,
            cores_per_rank,
            tasklets_per_core,
            scratchpad_bytes,
            dram_bank_bytes,
            dma_min_bytes,
            dma_max_bytes,
            bank_bandwidth,
            bus_bandwidth_per_rank,
            core_frequency,
            host_merge_throughput
        );
        if let Some(mul) = &self.mul_throughput {
            macro_rules! setmul {
                ($($field:ident),*) => {
                    $(if let Some(v) = mul.$field { cfg.mul_throughput.$field = v; })*
                };
            }
            setmul!(int8, int16, int32, int64, fp32, fp64);
        }
    }
}

/// Direction of a host transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    HostToBanks,
    BanksToHost,
}

/// Parallel-transfer granularity. Coarse pads every participating bank to
/// the global maximum; rank pads within each group of `cores_per_rank` banks
/// and serializes the groups; bank needs no inter-core padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferGranularity {
    Coarse,
    Rank,
    Bank,
}

impl TransferGranularity {
    pub fn name(self) -> &'static str {
        match self {
            TransferGranularity::Coarse => "coarse",
            TransferGranularity::Rank => "rank",
            TransferGranularity::Bank => "bank",
        }
    }
}

impl FromStr for TransferGranularity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "coarse" => Ok(TransferGranularity::Coarse),
            "rank" => Ok(TransferGranularity::Rank),
            "bank" => Ok(TransferGranularity::Bank),
            other => Err(format!("unknown granularity `{other}` (coarse|rank|bank)")),
        }
    }
}

/// One planned parallel transfer between the host and the banks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferPlan {
    pub direction: Direction,
    pub granularity: TransferGranularity,
    pub per_core_useful_bytes: Vec<usize>,
    pub per_core_padded_bytes: Vec<usize>,
}

impl TransferPlan {
    pub fn total_useful_bytes(&self) -> u64 {
        self.per_core_useful_bytes.iter().map(|&b| b as u64).sum()
    }

    pub fn total_padded_bytes(&self) -> u64 {
        self.per_core_padded_bytes.iter().map(|&b| b as u64).sum()
    }

    /// Fraction of moved bytes that are padding.
    pub fn padding_fraction(&self) -> f64 {
        let padded = self.total_padded_bytes();
        if padded == 0 {
            return 0.0;
        }
        1.0 - self.total_useful_bytes() as f64 / padded as f64
    }
}

fn round_up(bytes: usize, unit: usize) -> usize {
    bytes.div_ceil(unit) * unit
}

/// Plans one parallel transfer of `sizes[i]` useful bytes to/from core `i`.
pub fn plan_transfer(
    sizes: &[usize],
    direction: Direction,
    granularity: TransferGranularity,
    cfg: &MachineConfig,
) -> Result<TransferPlan> {
    let unit = cfg.dma_min_bytes;
    for (core, &s) in sizes.iter().enumerate() {
        if s > cfg.dram_bank_bytes {
            return Err(Error::Machine(format!(
                "core {core} transfer of {s} bytes exceeds bank capacity {}",
                cfg.dram_bank_bytes
            )));
        }
    }
    let padded: Vec<usize> = match granularity {
        TransferGranularity::Coarse => {
            let widest = sizes.iter().copied().max().unwrap_or(0);
            let widest = round_up(widest, unit);
            vec![widest; sizes.len()]
        }
        TransferGranularity::Rank => {
            let mut padded = Vec::with_capacity(sizes.len());
            for rank in sizes.chunks(cfg.cores_per_rank) {
                let widest = round_up(rank.iter().copied().max().unwrap_or(0), unit);
                padded.extend(std::iter::repeat_n(widest, rank.len()));
            }
            padded
        }
        TransferGranularity::Bank => sizes.iter().map(|&s| round_up(s, unit)).collect(),
    };
    Ok(TransferPlan {
        direction,
        granularity,
        per_core_useful_bytes: sizes.to_vec(),
        per_core_padded_bytes: padded,
    })
}

/// Models the wall-clock time of a planned transfer.
///
/// Coarse and bank transfers run all ranks in parallel; rank-granularity
/// transfers iterate over the ranks, serializing them on the bus.
pub fn transfer_time(plan: &TransferPlan, cfg: &MachineConfig) -> f64 {
    let cores = plan.per_core_padded_bytes.len();
    if cores == 0 || plan.total_padded_bytes() == 0 {
        return 0.0;
    }
    let n_ranks = cfg.rank_count(cores);
    match plan.granularity {
        TransferGranularity::Coarse | TransferGranularity::Bank => {
            plan.total_padded_bytes() as f64 / (cfg.bus_bandwidth_per_rank * n_ranks as f64)
        }
        TransferGranularity::Rank => plan
            .per_core_padded_bytes
            .chunks(cfg.cores_per_rank)
            .map(|rank| {
                rank.iter().map(|&b| b as u64).sum::<u64>() as f64 / cfg.bus_bandwidth_per_rank
            })
            .sum(),
    }
}

/// Roofline estimate for one core's kernel phase: the slower of compute
/// (multiply-accumulates over multiply throughput) and local-bank traffic
/// (bytes over bank bandwidth).
pub fn kernel_time_estimate(
    compute_ops: u64,
    mram_bytes: u64,
    dtype: Dtype,
    cfg: &MachineConfig,
) -> f64 {
    let compute = compute_ops as f64 / cfg.mul_throughput.get(dtype);
    let memory = mram_bytes as f64 / cfg.bank_bandwidth;
    compute.max(memory)
}
