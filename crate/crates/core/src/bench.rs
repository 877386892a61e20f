//! Micro-benchmarks (`zero`, `copy`, `and`) across allocators and sizes.
//!
//! Sizes are given in bits and rounded up to whole bytes. Every run builds a
//! fresh allocator, so runs are independent and can execute in parallel; the
//! sweep still returns records in grid order.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baseline::{BaselineAllocator, BaselineKind};
use crate::config::{Setup, SweepSettings};
use crate::engine::{check_executability, execute, OperandLayout, PudOpKind, PudOperation};
use crate::error::{AllocError, Error};
use crate::pool::PhysicalPool;
use crate::puma::{PumaAllocator, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Zero,
    Copy,
    And,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::Zero, Benchmark::Copy, Benchmark::And];

    pub fn op_kind(self) -> PudOpKind {
        match self {
            Benchmark::Zero => PudOpKind::RowInitZero,
            Benchmark::Copy => PudOpKind::RowCopy,
            Benchmark::And => PudOpKind::And,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Zero => "zero",
            Benchmark::Copy => "copy",
            Benchmark::And => "and",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown benchmark `{s}` (expected zero, copy or and)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocatorKind {
    Puma,
    Baseline(BaselineKind),
}

impl AllocatorKind {
    pub const ALL: [AllocatorKind; 4] = [
        AllocatorKind::Puma,
        AllocatorKind::Baseline(BaselineKind::MallocSim),
        AllocatorKind::Baseline(BaselineKind::MemalignSim),
        AllocatorKind::Baseline(BaselineKind::HugepageSim),
    ];

    pub const MALLOC: AllocatorKind = AllocatorKind::Baseline(BaselineKind::MallocSim);

    pub fn name(self) -> &'static str {
        match self {
            AllocatorKind::Puma => "puma",
            AllocatorKind::Baseline(k) => k.name(),
        }
    }
}

impl fmt::Display for AllocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AllocatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "puma" {
            return Ok(AllocatorKind::Puma);
        }
        s.parse::<BaselineKind>()
            .map(AllocatorKind::Baseline)
            .map_err(|_| format!("unknown allocator `{s}` (expected puma, malloc, memalign or hugepage)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSpec {
    pub benchmark: Benchmark,
    pub allocator: AllocatorKind,
    pub size_bits: u64,
    pub seed: u64,
    pub repetitions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    AllocFailed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Ok => "ok",
            RunStatus::AllocFailed => "alloc_failed",
        })
    }
}

/// Result of one run before normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub pim_fraction: f64,
    pub latency: f64,
    pub status: RunStatus,
    pub trace: Vec<TraceEvent>,
}

impl Measurement {
    fn failed(trace: Vec<TraceEvent>) -> Self {
        Measurement {
            pim_fraction: 0.0,
            latency: f64::NAN,
            status: RunStatus::AllocFailed,
            trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub benchmark: Benchmark,
    pub allocator: AllocatorKind,
    pub size_bits: u64,
    pub pim_fraction: f64,
    pub latency: f64,
    pub speedup_vs_malloc: f64,
    pub seed: u64,
    pub status: RunStatus,
}

pub fn size_bytes(size_bits: u64) -> u64 {
    size_bits.div_ceil(8)
}

fn evaluate(
    setup: &Setup,
    benchmark: Benchmark,
    operands: &[&dyn OperandLayout],
    bytes: u64,
) -> Result<(f64, f64), Error> {
    let op = PudOperation::new(benchmark.op_kind(), operands.to_vec(), bytes)?;
    let report = check_executability(&op, &setup.mapping)?;
    Ok((report.pim_fraction(), execute(&report, &setup.config.cost)))
}

fn measure_puma(
    setup: &Setup,
    benchmark: Benchmark,
    bytes: u64,
    seed: u64,
    tracing: bool,
) -> Result<Measurement, Error> {
    let pool = PhysicalPool::new(setup.mapping.clone(), setup.layout.puma_pool, setup.pool_config(seed))?;
    let mut puma = PumaAllocator::new(pool);
    puma.set_tracing(tracing);
    if let Err(e) = puma.pim_preallocate(setup.config.pool.pages) {
        return match e {
            AllocError::InsufficientMemory { .. } => Ok(Measurement::failed(puma.trace().to_vec())),
            other => Err(other.into()),
        };
    }
    let n = benchmark.op_kind().arity();
    let mut allocs = Vec::with_capacity(n);
    let first = match puma.pim_alloc(bytes) {
        Ok(a) => a,
        Err(_) => return Ok(Measurement::failed(puma.trace().to_vec())),
    };
    let hint = first.virtual_base;
    allocs.push(first);
    for _ in 1..n {
        match puma.pim_alloc_align(bytes, hint) {
            Ok(a) => allocs.push(a),
            Err(_) => return Ok(Measurement::failed(puma.trace().to_vec())),
        }
    }
    let operands: Vec<&dyn OperandLayout> = allocs.iter().map(|a| a as &dyn OperandLayout).collect();
    let (pim_fraction, latency) = evaluate(setup, benchmark, &operands, bytes)?;
    for a in &allocs {
        puma.pim_free(a.virtual_base)?;
    }
    Ok(Measurement {
        pim_fraction,
        latency,
        status: RunStatus::Ok,
        trace: puma.trace().to_vec(),
    })
}

fn measure_baseline(
    setup: &Setup,
    kind: BaselineKind,
    benchmark: Benchmark,
    bytes: u64,
    seed: u64,
) -> Result<Measurement, Error> {
    let pool = &setup.config.pool;
    let mut alloc = BaselineAllocator::with_frame_size(kind, &setup.layout, pool.huge_page_size, pool.frame_size, seed);
    let mut allocs = Vec::new();
    for _ in 0..benchmark.op_kind().arity() {
        match alloc.alloc(bytes) {
            Ok(a) => allocs.push(a),
            Err(_) => return Ok(Measurement::failed(Vec::new())),
        }
    }
    let operands: Vec<&dyn OperandLayout> = allocs.iter().map(|a| a as &dyn OperandLayout).collect();
    let (pim_fraction, latency) = evaluate(setup, benchmark, &operands, bytes)?;
    Ok(Measurement {
        pim_fraction,
        latency,
        status: RunStatus::Ok,
        trace: Vec::new(),
    })
}

/// One run on a fresh allocator. For PUMA the second and third operands are
/// allocated aligned to the first.
pub fn measure(
    setup: &Setup,
    benchmark: Benchmark,
    allocator: AllocatorKind,
    size_bits: u64,
    seed: u64,
    tracing: bool,
) -> Result<Measurement, Error> {
    let bytes = size_bytes(size_bits);
    match allocator {
        AllocatorKind::Puma => measure_puma(setup, benchmark, bytes, seed, tracing),
        AllocatorKind::Baseline(kind) => measure_baseline(setup, kind, benchmark, bytes, seed),
    }
}

fn speedup(malloc_latency: f64, latency: f64) -> f64 {
    malloc_latency / latency
}

fn record(spec_like: (Benchmark, AllocatorKind, u64, u64), m: &Measurement, malloc_latency: f64) -> BenchRecord {
    let (benchmark, allocator, size_bits, seed) = spec_like;
    BenchRecord {
        benchmark,
        allocator,
        size_bits,
        pim_fraction: m.pim_fraction,
        latency: m.latency,
        speedup_vs_malloc: speedup(malloc_latency, m.latency),
        seed,
        status: m.status,
    }
}

/// Runs `spec` once at `spec.seed` and normalises against malloc at the same
/// benchmark, size and seed.
pub fn run_microbenchmark(setup: &Setup, spec: &BenchSpec) -> Result<BenchRecord, Error> {
    Ok(run_traced(setup, spec, false)?.0)
}

/// Like [`run_microbenchmark`], also returning the PUMA allocator trace.
pub fn run_traced(setup: &Setup, spec: &BenchSpec, tracing: bool) -> Result<(BenchRecord, Vec<TraceEvent>), Error> {
    let m = measure(
        setup,
        spec.benchmark,
        spec.allocator,
        spec.size_bits,
        spec.seed,
        tracing,
    )?;
    let malloc_latency = if spec.allocator == AllocatorKind::MALLOC {
        m.latency
    } else {
        measure(
            setup,
            spec.benchmark,
            AllocatorKind::MALLOC,
            spec.size_bits,
            spec.seed,
            false,
        )?
        .latency
    };
    let rec = record(
        (spec.benchmark, spec.allocator, spec.size_bits, spec.seed),
        &m,
        malloc_latency,
    );
    Ok((rec, m.trace))
}

/// `spec.repetitions` runs at seeds `seed, seed + 1, ...`.
pub fn run_repeated(setup: &Setup, spec: &BenchSpec) -> Result<Vec<BenchRecord>, Error> {
    (0..spec.repetitions as u64)
        .map(|r| {
            run_microbenchmark(
                setup,
                &BenchSpec {
                    seed: spec.seed.wrapping_add(r),
                    ..*spec
                },
            )
        })
        .collect()
}

/// Geometric grid from `min_bits` to `max_bits`. Interior points of at least
/// one row are rounded to whole rows, smaller ones to whole bits.
pub fn size_grid(s: &SweepSettings, row_bytes: u64) -> Vec<u64> {
    if s.points == 1 {
        return vec![s.min_bits];
    }
    let row_bits = row_bytes * 8;
    let ratio = (s.max_bits as f64 / s.min_bits as f64).powf(1.0 / (s.points - 1) as f64);
    let mut grid: Vec<u64> = (0..s.points)
        .map(|k| {
            if k == 0 {
                return s.min_bits;
            }
            if k == s.points - 1 {
                return s.max_bits;
            }
            let raw = s.min_bits as f64 * ratio.powi(k as i32);
            if raw >= row_bits as f64 {
                ((raw / row_bits as f64).round() as u64).max(1) * row_bits
            } else {
                raw.round() as u64
            }
        })
        .collect();
    grid.dedup();
    grid
}

/// Full grid: benchmark x allocator x size x repetition, in that nesting order.
pub fn sweep(setup: &Setup) -> Result<Vec<BenchRecord>, Error> {
    let s = &setup.config.sweep;
    let grid = size_grid(s, setup.mapping.region_size());
    let mut jobs = Vec::new();
    for b in Benchmark::ALL {
        for a in AllocatorKind::ALL {
            for &size in &grid {
                for r in 0..s.repetitions as u64 {
                    jobs.push((b, a, size, s.seed.wrapping_add(r)));
                }
            }
        }
    }
    let measured: Vec<Measurement> = jobs
        .par_iter()
        .map(|&(b, a, size, seed)| measure(setup, b, a, size, seed, false))
        .collect::<Result<_, _>>()?;
    let malloc: HashMap<(Benchmark, u64, u64), f64> = jobs
        .iter()
        .zip(&measured)
        .filter(|((_, a, _, _), _)| *a == AllocatorKind::MALLOC)
        .map(|(&(b, _, size, seed), m)| ((b, size, seed), m.latency))
        .collect();
    Ok(jobs
        .iter()
        .zip(&measured)
        .map(|(&(b, a, size, seed), m)| record((b, a, size, seed), m, malloc[&(b, size, seed)]))
        .collect())
}

pub const CSV_HEADER: &str = "benchmark,allocator,size_bits,pim_fraction,latency,speedup_vs_malloc,seed,status";

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.benchmark, r.allocator, r.size_bits, r.pim_fraction, r.latency, r.speedup_vs_malloc, r.seed, r.status
        ));
    }
    out
}

pub fn emit_csv(records: &[BenchRecord], path: &Path) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(records_to_csv(records).as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}
