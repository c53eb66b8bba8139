//! The experiment driver behind the `sparsepim` binary: load or generate a
//! matrix, run a single scheme or a sweep, verify every registered scheme
//! against the dense reference, or print sparsity statistics.

use crate::error::{Error, Result};
use crate::host::{make_input_vector, reference_spmv, run_pipeline, sweep};
use crate::machine::MachineConfig;
use crate::matio::{
    compute_stats, generate_synthetic, parse_matrix_market, SynthKind, TripletMatrix,
};
use crate::scalar::{Dtype, Scalar};
use crate::scheme::{allowed_syncs, parse_scheme_name, registry, SchemeId};
use crate::with_scalar;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

/// Exit code for usage-class errors (unknown scheme, bad generator spec).
pub const EXIT_USAGE: i32 = 2;
/// Exit code for runtime failures and verification mismatches.
pub const EXIT_FAILURE: i32 = 1;

/// Where the matrix comes from.
#[derive(Debug, Clone)]
pub enum MatrixSource {
    File(PathBuf),
    Generate { kind: SynthKind, n: usize },
}

/// A fully resolved run request.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub source: MatrixSource,
    pub scheme_names: Vec<String>,
    pub dtype: Dtype,
    pub machine: MachineConfig,
    pub core_counts: Vec<usize>,
    pub vertical_counts: Vec<usize>,
    pub granularity: crate::machine::TransferGranularity,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    /// Resolves scheme names to validated identifiers; errors are
    /// usage-class.
    pub fn resolve_schemes(&self) -> Result<Vec<SchemeId>> {
        if self.scheme_names.iter().any(|s| s == "all") {
            return Ok(registry()
                .into_iter()
                .map(|k| SchemeId::new(k, self.dtype, self.granularity))
                .collect());
        }
        self.scheme_names
            .iter()
            .map(|name| parse_scheme_name(name, self.dtype, self.granularity))
            .collect()
    }
}

/// Parses a generator spec like `power-law:n=1000,nnz=5000,exponent=2.1`.
///
/// Kinds: `banded` (bandwidth), `uniform` (nnz), `power-law` (nnz,
/// exponent), `block` (r, c, blocks). Every kind takes `n`.
pub fn parse_generator_spec(spec: &str) -> Result<(SynthKind, usize)> {
    let usage = |msg: &str| Error::Generate(format!("{msg} (in generator spec `{spec}`)"));
    let (kind_name, rest) = spec.split_once(':').ok_or_else(|| usage("missing `:`"))?;
    let mut n = None;
    let mut params: Vec<(&str, &str)> = Vec::new();
    for pair in rest.split(',') {
        let (k, v) = pair.split_once('=').ok_or_else(|| usage("expected key=value"))?;
        if k == "n" {
            n = Some(v.parse::<usize>().map_err(|_| usage("invalid n"))?);
        } else {
            params.push((k, v));
        }
    }
    let n = n.ok_or_else(|| usage("missing n"))?;
    let get = |key: &str| -> Option<&str> {
        params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    };
    let kind = match kind_name {
        "banded" => SynthKind::Banded {
            bandwidth: get("bandwidth")
                .ok_or_else(|| usage("banded needs bandwidth"))?
                .parse()
                .map_err(|_| usage("invalid bandwidth"))?,
        },
        "uniform" | "uniform-random" => SynthKind::UniformRandom {
            nnz: get("nnz")
                .ok_or_else(|| usage("uniform needs nnz"))?
                .parse()
                .map_err(|_| usage("invalid nnz"))?,
        },
        "power-law" | "powerlaw" => SynthKind::PowerLaw {
            nnz: get("nnz")
                .ok_or_else(|| usage("power-law needs nnz"))?
                .parse()
                .map_err(|_| usage("invalid nnz"))?,
            exponent: get("exponent")
                .ok_or_else(|| usage("power-law needs exponent"))?
                .parse()
                .map_err(|_| usage("invalid exponent"))?,
        },
        "block" | "block-pattern" => SynthKind::BlockPattern {
            block_r: get("r").unwrap_or("4").parse().map_err(|_| usage("invalid r"))?,
            block_c: get("c").unwrap_or("4").parse().map_err(|_| usage("invalid c"))?,
            n_blocks: get("blocks")
                .ok_or_else(|| usage("block needs blocks"))?
                .parse()
                .map_err(|_| usage("invalid blocks"))?,
        },
        other => return Err(usage(&format!("unknown generator kind `{other}`"))),
    };
    Ok((kind, n))
}

/// A loaded matrix plus ingestion metadata for reports.
pub struct LoadedMatrix {
    pub label: String,
    pub matrix: TripletMatrix<f64>,
    /// (declared entries, expanded entries, symmetric) for file sources.
    pub market_meta: Option<(usize, usize, bool)>,
}

pub fn load_matrix(source: &MatrixSource, seed: u64) -> Result<LoadedMatrix> {
    match source {
        MatrixSource::File(path) => {
            let file = File::open(path)?;
            let parsed = parse_matrix_market(BufReader::new(file))?;
            Ok(LoadedMatrix {
                label: path.display().to_string(),
                matrix: parsed.matrix,
                market_meta: Some((
                    parsed.declared_entries,
                    parsed.expanded_entries,
                    parsed.symmetric,
                )),
            })
        }
        MatrixSource::Generate { kind, n } => Ok(LoadedMatrix {
            label: format!("{}(n={n}, seed={seed})", kind.name()),
            matrix: generate_synthetic(kind, *n, seed)?,
            market_meta: None,
        }),
    }
}

fn write_output(out: &Option<PathBuf>, payload: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(payload.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

/// Scientific notation with a two-digit exponent (`7.59e-06`).
pub fn format_sci(v: f64) -> String {
    let s = format!("{v:.2e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) =
                exp.strip_prefix('-').map_or(("+", exp), |rest| ("-", rest));
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

/// Single end-to-end execution; JSON report to stdout or `--out`.
pub fn cmd_run(spec: &RunSpec) -> Result<i32> {
    let schemes = spec.resolve_schemes()?;
    let scheme = schemes
        .first()
        .ok_or_else(|| Error::Scheme("run takes exactly one scheme".into()))?;
    let loaded = load_matrix(&spec.source, spec.seed)?;
    let mut cfg = spec.machine.clone();
    if let Some(&cores) = spec.core_counts.first() {
        cfg.n_cores = cores;
    }
    let vertical = spec.vertical_counts.first().copied().unwrap_or(1);
    with_scalar!(spec.dtype, S => {
        let m = loaded.matrix.cast::<S>();
        let x = make_input_vector::<S>(m.n_cols(), spec.seed);
        let report = run_pipeline(&m, scheme, vertical, &cfg, &x)?;
        write_output(&spec.out, &(report.to_json() + "\n"))?;
    });
    Ok(0)
}

/// Grid sweep; CSV table plus a best-config comment line.
pub fn cmd_sweep(spec: &RunSpec) -> Result<i32> {
    let schemes = spec.resolve_schemes()?;
    let loaded = load_matrix(&spec.source, spec.seed)?;
    let core_counts = if spec.core_counts.is_empty() {
        vec![spec.machine.n_cores]
    } else {
        spec.core_counts.clone()
    };
    let vertical_counts = if spec.vertical_counts.is_empty() {
        vec![1]
    } else {
        spec.vertical_counts.clone()
    };
    with_scalar!(spec.dtype, S => {
        let m = loaded.matrix.cast::<S>();
        let x = make_input_vector::<S>(m.n_cols(), spec.seed);
        let table = sweep(&m, &schemes, &core_counts, &vertical_counts, &spec.machine, &x)?;
        let mut csv = table.to_csv();
        if let Some(best) = table.best() {
            csv.push_str(&format!(
                "# best scheme={} cores={} vertical={} gops={}\n",
                best.scheme, best.cores, best.vertical, best.gops
            ));
        }
        write_output(&spec.out, &csv)?;
    });
    Ok(0)
}

/// Runs every registered scheme variant against the dense reference.
/// Returns nonzero if any output mismatches.
pub fn cmd_verify(spec: &RunSpec) -> Result<i32> {
    let loaded = load_matrix(&spec.source, spec.seed)?;
    let mut cfg = spec.machine.clone();
    if let Some(&cores) = spec.core_counts.first() {
        cfg.n_cores = cores;
    }
    let vertical = spec.vertical_counts.first().copied().unwrap_or(1);
    let mut failures = 0usize;
    let mut checked = 0usize;
    with_scalar!(spec.dtype, S => {
        let m = loaded.matrix.cast::<S>();
        let x = make_input_vector::<S>(m.n_cols(), spec.seed);
        let expected = reference_spmv(&m, &x);
        for kernel in registry() {
            let base = SchemeId::new(kernel, spec.dtype, spec.granularity);
            for sync in allowed_syncs(kernel, base.thread_balance, spec.dtype, base.block_dims.0)
            {
                let scheme = base.with_sync(sync)?;
                let report = run_pipeline(&m, &scheme, vertical, &cfg, &x)?;
                let ok = outputs_match(&report.y, &expected);
                checked += 1;
                if !ok {
                    failures += 1;
                }
                println!(
                    "{:<16} {}",
                    scheme.display_name(),
                    if ok { "PASS" } else { "FAIL" }
                );
            }
        }
    });
    println!(
        "verified {checked} scheme variants across {} registered kernels: {}",
        registry().len(),
        if failures == 0 { "all match".to_string() } else { format!("{failures} mismatched") }
    );
    Ok(if failures == 0 { 0 } else { EXIT_FAILURE })
}

/// Integer outputs must match bit-for-bit; floats within the documented
/// elementwise tolerance.
pub fn outputs_match<S: Scalar>(got: &[S], expected: &[S]) -> bool {
    if got.len() != expected.len() {
        return false;
    }
    match S::DTYPE {
        Dtype::Fp32 => got.iter().zip(expected).all(|(a, b)| {
            (a.to_f64() - b.to_f64()).abs() <= 1e-6 * (b.to_f64().abs() + 1.0)
        }),
        Dtype::Fp64 => got.iter().zip(expected).all(|(a, b)| {
            (a.to_f64() - b.to_f64()).abs() <= 1e-12 * (b.to_f64().abs() + 1.0)
        }),
        _ => got == expected,
    }
}

/// Prints a statistics row for the matrix.
pub fn cmd_stats(source: &MatrixSource, seed: u64) -> Result<i32> {
    let loaded = load_matrix(source, seed)?;
    let stats = compute_stats(&loaded.matrix)?;
    println!("matrix: {}", loaded.label);
    println!("shape: {} x {}", stats.n_rows, stats.n_cols);
    match loaded.market_meta {
        Some((declared, expanded, true)) => {
            println!("nnz: {} (stored {declared}, symmetric expanded to {expanded})", stats.nnz)
        }
        _ => println!("nnz: {}", stats.nnz),
    }
    println!("sparsity: {}", format_sci(stats.sparsity));
    println!("nnz-r-std: {:.3}", stats.nnz_r_std);
    println!("nnz-c-std: {:.3}", stats.nnz_c_std);
    println!("max-row-nnz: {}", stats.max_row_nnz);
    println!("empty-rows: {}", stats.empty_row_count);
    Ok(0)
}
