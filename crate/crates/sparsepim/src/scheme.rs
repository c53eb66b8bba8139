//! The kernel registry: every supported combination of compressed format,
//! partitioning technique, and core-level balancing, plus the per-run knobs
//! (thread balancing, synchronization, data type, transfer granularity) that
//! together identify one point in the design space.

use crate::error::{Error, Result};
use crate::formats::Format;
use crate::machine::TransferGranularity;
use crate::scalar::Dtype;
use serde::Serialize;

/// Partitioning technique across cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PartKind {
    OneD,
    EquallySized,
    EquallyWide,
    VariableSized,
}

impl PartKind {
    pub fn is_two_d(self) -> bool {
        !matches!(self, PartKind::OneD)
    }
}

/// Work balancing across cores (within a vertical partition for 2D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CoreBalance {
    /// Rows split evenly; remainder rows go to the last cores.
    Rows,
    /// Nonzeros balanced at row granularity (block-row granularity for the
    /// blocked formats) by greedy prefix scan.
    NnzRowGrain,
    /// Nonzeros balanced exactly (COO splits rows; BCOO balances at block
    /// granularity and may split block rows).
    Nnz,
    /// Blocks balanced (block-row granularity for BCSR, exact for BCOO).
    Blocks,
    /// Statically shaped tiles; no balancing (equally-sized grids).
    Static,
}

/// One of the 25 registered kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KernelId {
    pub format: Format,
    pub partitioning: PartKind,
    pub core_balance: CoreBalance,
}

/// Work balancing across the tasklets of one core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ThreadBalance {
    /// Rows, assigned in 8-byte-aligned chunks of the output vector.
    Rows,
    /// Nonzeros at row granularity (block-row granularity for BCSR).
    NnzRowGrain,
    /// Nonzeros exactly (COO splits rows across tasklets; BCOO balances at
    /// block granularity).
    Nnz,
    /// Blocks (block-row granularity for BCSR, exact for BCOO).
    Blocks,
}

/// Synchronization among tasklets for output-vector writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SyncMode {
    /// No cross-tasklet write hazards by construction.
    None,
    /// One global mutex.
    LbCg,
    /// 32 mutexes, selected from the output address by a shift.
    LbFg,
    /// Tasklets buffer partials for contended elements; tasklet 0 merges.
    Lf,
}

impl SyncMode {
    /// Mutex count backing fine-grained locking.
    pub const FG_MUTEXES: usize = 32;

    pub fn suffix(self) -> &'static str {
        match self {
            SyncMode::None => "",
            SyncMode::LbCg => "-lb-cg",
            SyncMode::LbFg => "-lb-fg",
            SyncMode::Lf => "-lf",
        }
    }
}

impl KernelId {
    pub const fn new(format: Format, partitioning: PartKind, core_balance: CoreBalance) -> Self {
        Self { format, partitioning, core_balance }
    }

    /// Canonical kernel name as used by the CLI and reports.
    pub fn name(&self) -> &'static str {
        use CoreBalance::*;
        use Format::*;
        use PartKind::*;
        match (self.format, self.partitioning, self.core_balance) {
            (Csr, OneD, Rows) => "CSR.row",
            (Csr, OneD, NnzRowGrain) => "CSR.nnz",
            (Coo, OneD, Rows) => "COO.row",
            (Coo, OneD, NnzRowGrain) => "COO.nnz-rgrn",
            (Coo, OneD, Nnz) => "COO.nnz",
            (Bcsr, OneD, Blocks) => "BCSR.block",
            (Bcsr, OneD, NnzRowGrain) => "BCSR.nnz",
            (Bcoo, OneD, Blocks) => "BCOO.block",
            (Bcoo, OneD, Nnz) => "BCOO.nnz",
            (Csr, EquallySized, Static) => "DCSR",
            (Coo, EquallySized, Static) => "DCOO",
            (Bcsr, EquallySized, Static) => "DBCSR",
            (Bcoo, EquallySized, Static) => "DBCOO",
            (Csr, EquallyWide, NnzRowGrain) => "RBDCSR",
            (Coo, EquallyWide, Nnz) => "RBDCOO",
            (Bcsr, EquallyWide, Blocks) => "RBDBCSR",
            (Bcsr, EquallyWide, NnzRowGrain) => "RBDBCSR.nnz",
            (Bcoo, EquallyWide, Blocks) => "RBDBCOO",
            (Bcoo, EquallyWide, Nnz) => "RBDBCOO.nnz",
            (Csr, VariableSized, NnzRowGrain) => "BDCSR",
            (Coo, VariableSized, Nnz) => "BDCOO",
            (Bcsr, VariableSized, Blocks) => "BDBCSR",
            (Bcsr, VariableSized, NnzRowGrain) => "BDBCSR.nnz",
            (Bcoo, VariableSized, Blocks) => "BDBCOO",
            (Bcoo, VariableSized, Nnz) => "BDBCOO.nnz",
            _ => "invalid",
        }
    }
}

/// Every registered kernel, in canonical order.
pub fn registry() -> Vec<KernelId> {
    use CoreBalance::*;
    use Format::*;
    use PartKind::*;
    vec![
        KernelId::new(Csr, OneD, Rows),
        KernelId::new(Csr, OneD, NnzRowGrain),
        KernelId::new(Coo, OneD, Rows),
        KernelId::new(Coo, OneD, NnzRowGrain),
        KernelId::new(Coo, OneD, Nnz),
        KernelId::new(Bcsr, OneD, Blocks),
        KernelId::new(Bcsr, OneD, NnzRowGrain),
        KernelId::new(Bcoo, OneD, Blocks),
        KernelId::new(Bcoo, OneD, Nnz),
        KernelId::new(Csr, EquallySized, Static),
        KernelId::new(Coo, EquallySized, Static),
        KernelId::new(Bcsr, EquallySized, Static),
        KernelId::new(Bcoo, EquallySized, Static),
        KernelId::new(Csr, EquallyWide, NnzRowGrain),
        KernelId::new(Coo, EquallyWide, Nnz),
        KernelId::new(Bcsr, EquallyWide, Blocks),
        KernelId::new(Bcsr, EquallyWide, NnzRowGrain),
        KernelId::new(Bcoo, EquallyWide, Blocks),
        KernelId::new(Bcoo, EquallyWide, Nnz),
        KernelId::new(Csr, VariableSized, NnzRowGrain),
        KernelId::new(Coo, VariableSized, Nnz),
        KernelId::new(Bcsr, VariableSized, Blocks),
        KernelId::new(Bcsr, VariableSized, NnzRowGrain),
        KernelId::new(Bcoo, VariableSized, Blocks),
        KernelId::new(Bcoo, VariableSized, Nnz),
    ]
}

/// Looks a kernel up by its canonical name.
pub fn kernel_by_name(name: &str) -> Option<KernelId> {
    registry().into_iter().find(|k| k.name() == name)
}

/// A full point in the design space: kernel x thread balance x sync x
/// data type x transfer granularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeId {
    pub kernel: KernelId,
    pub thread_balance: ThreadBalance,
    pub sync: SyncMode,
    pub dtype: Dtype,
    pub granularity: TransferGranularity,
    /// Block dimensions for the blocked formats.
    pub block_dims: (usize, usize),
}

impl SchemeId {
    /// Builds a scheme with the default thread balancing and synchronization
    /// for the kernel.
    pub fn new(kernel: KernelId, dtype: Dtype, granularity: TransferGranularity) -> Self {
        let block_dims = crate::formats::DEFAULT_BLOCK_DIMS;
        let thread_balance = default_thread_balance(kernel);
        let sync = default_sync(kernel, dtype, block_dims.0);
        Self { kernel, thread_balance, sync, dtype, granularity, block_dims }
    }

    pub fn with_sync(mut self, sync: SyncMode) -> Result<Self> {
        self.sync = sync;
        self.validate()?;
        Ok(self)
    }

    pub fn with_thread_balance(mut self, tb: ThreadBalance) -> Result<Self> {
        self.thread_balance = tb;
        self.validate()?;
        Ok(self)
    }

    /// Kernel name plus sync suffix, e.g. `COO.nnz-lf`.
    pub fn display_name(&self) -> String {
        format!("{}{}", self.kernel.name(), self.sync.suffix())
    }

    /// Checks that thread balance and sync mode are supported for this
    /// kernel and data type.
    pub fn validate(&self) -> Result<()> {
        if !registry().contains(&self.kernel) {
            return Err(Error::Scheme(format!("unregistered kernel {:?}", self.kernel)));
        }
        if !allowed_thread_balances(self.kernel).contains(&self.thread_balance) {
            return Err(Error::Scheme(format!(
                "thread balance {:?} not supported by {}",
                self.thread_balance,
                self.kernel.name()
            )));
        }
        let allowed = allowed_syncs(self.kernel, self.thread_balance, self.dtype, self.block_dims.0);
        if !allowed.contains(&self.sync) {
            return Err(Error::Scheme(format!(
                "sync mode {:?} not supported by {} with thread balance {:?} and {}",
                self.sync,
                self.kernel.name(),
                self.thread_balance,
                self.dtype
            )));
        }
        Ok(())
    }
}

/// Thread balancings supported per kernel.
pub fn allowed_thread_balances(kernel: KernelId) -> Vec<ThreadBalance> {
    match kernel.format {
        Format::Csr => vec![ThreadBalance::Rows, ThreadBalance::NnzRowGrain],
        Format::Coo => match kernel.core_balance {
            // Fragments of exactly nnz-balanced plans may hold partial rows,
            // so only exact nnz balancing applies across tasklets.
            CoreBalance::Nnz | CoreBalance::Static => vec![ThreadBalance::Nnz],
            // Row-granularity kernels keep tasklets race-free.
            _ => vec![ThreadBalance::Rows, ThreadBalance::NnzRowGrain],
        },
        Format::Bcsr => vec![ThreadBalance::Blocks, ThreadBalance::NnzRowGrain],
        Format::Bcoo => vec![ThreadBalance::Blocks, ThreadBalance::Nnz],
    }
}

/// Sync modes supported per kernel/thread-balance/dtype.
///
/// BCSR kernels with blocks narrower than the 64-bit output-write granularity
/// require locking; lock-free is never available for BCSR. Lock-free BCOO is
/// available for 1D kernels only.
pub fn allowed_syncs(
    kernel: KernelId,
    thread_balance: ThreadBalance,
    dtype: Dtype,
    block_r: usize,
) -> Vec<SyncMode> {
    match kernel.format {
        Format::Csr => vec![SyncMode::None],
        Format::Coo => {
            if thread_balance == ThreadBalance::Nnz {
                vec![SyncMode::LbCg, SyncMode::LbFg, SyncMode::Lf]
            } else {
                vec![SyncMode::None]
            }
        }
        Format::Bcsr => {
            if block_r * dtype.width() < 8 {
                vec![SyncMode::LbCg, SyncMode::LbFg]
            } else {
                vec![SyncMode::None]
            }
        }
        Format::Bcoo => {
            if kernel.partitioning == PartKind::OneD {
                vec![SyncMode::LbCg, SyncMode::LbFg, SyncMode::Lf]
            } else {
                vec![SyncMode::LbCg, SyncMode::LbFg]
            }
        }
    }
}

/// Default thread balancing: nonzeros, at the finest granularity the kernel
/// supports.
pub fn default_thread_balance(kernel: KernelId) -> ThreadBalance {
    match kernel.format {
        Format::Csr | Format::Bcsr => ThreadBalance::NnzRowGrain,
        Format::Bcoo => ThreadBalance::Nnz,
        Format::Coo => match kernel.core_balance {
            CoreBalance::Nnz | CoreBalance::Static => ThreadBalance::Nnz,
            _ => ThreadBalance::NnzRowGrain,
        },
    }
}

fn default_sync(kernel: KernelId, dtype: Dtype, block_r: usize) -> SyncMode {
    let allowed = allowed_syncs(kernel, default_thread_balance(kernel), dtype, block_r);
    if allowed.contains(&SyncMode::None) {
        SyncMode::None
    } else {
        SyncMode::LbCg
    }
}

/// Parses a CLI scheme name: a kernel name with an optional sync suffix
/// (`-lb`, `-lb-cg`, `-lb-fg`, `-lf`), e.g. `COO.nnz-lf` or `RBDBCSR.nnz`.
pub fn parse_scheme_name(
    name: &str,
    dtype: Dtype,
    granularity: TransferGranularity,
) -> Result<SchemeId> {
    let (base, sync) = if let Some(base) = name.strip_suffix("-lb-cg") {
        (base, Some(SyncMode::LbCg))
    } else if let Some(base) = name.strip_suffix("-lb-fg") {
        (base, Some(SyncMode::LbFg))
    } else if let Some(base) = name.strip_suffix("-lb") {
        (base, Some(SyncMode::LbCg))
    } else if let Some(base) = name.strip_suffix("-lf") {
        (base, Some(SyncMode::Lf))
    } else {
        (name, None)
    };
    let kernel = kernel_by_name(base).ok_or_else(|| {
        Error::Scheme(format!(
            "unknown scheme `{name}` (see the registry for valid kernel names)"
        ))
    })?;
    let scheme = SchemeId::new(kernel, dtype, granularity);
    match sync {
        Some(s) => scheme.with_sync(s),
        None => Ok(scheme),
    }
}
