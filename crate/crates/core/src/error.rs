use std::path::PathBuf;

use thiserror::Error;

use crate::dram::{Field, GlobalSubarrayId};
use crate::engine::PudOpKind;
use crate::puma::VirtAddr;

/// Rejected geometry, mapping or config file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("geometry field `{field}` must be a power of two >= 1, got {value}")]
    NotPowerOfTwo { field: &'static str, value: u64 },
    #[error("bit range {lo}..={hi} for {field} is inverted")]
    InvertedRange { field: Field, lo: u32, hi: u32 },
    #[error("overlapping bit ranges: bit {bit} claimed by both {first} and {second}")]
    OverlappingBits { bit: u32, first: Field, second: Field },
    #[error("uncovered bits: {bits:?} (address width is {width})")]
    UncoveredBits { bits: Vec<u32>, width: u32 },
    #[error("width mismatch for {field}: mapping assigns {actual} bits, geometry needs {expected}")]
    WidthMismatch { field: Field, expected: u32, actual: u32 },
    #[error("non-contiguous row regions: bit {bit} is a {field} bit below the row boundary (bit {boundary})")]
    NonContiguousRegion { bit: u32, field: Field, boundary: u32 },
    #[error("invalid pool parameter: {0}")]
    Pool(String),
    #[error("invalid cost parameter `{name}`: {value} (must be > 0)")]
    Cost { name: &'static str, value: f64 },
    #[error("invalid sweep parameter: {0}")]
    Sweep(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AddressError {
    #[error("physical address {addr:#x} is outside the {capacity:#x}-byte address space")]
    OutOfRange { addr: u64, capacity: u64 },
    #[error("{field} index {value} out of bounds (limit {limit})")]
    CoordinateOutOfBounds { field: Field, value: u64, limit: u64 },
}

/// Failures of the pool, the PUMA allocator and the baseline allocators.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocError {
    #[error("cannot preallocate zero huge pages")]
    ZeroPages,
    #[error("insufficient simulated memory: requested {requested} huge pages, {available} available")]
    InsufficientMemory { requested: usize, available: usize },
    #[error("region at {0:#x} is already free")]
    DoubleRelease(u64),
    #[error("pool not initialized")]
    NotInitialized,
    #[error("pool already initialized")]
    AlreadyInitialized,
    #[error("allocation size must be at least one byte")]
    ZeroSize,
    #[error("out of pool memory: needed {needed} regions, obtained {obtained}")]
    OutOfMemory { needed: usize, obtained: usize },
    #[error("no live allocation at hint address {0:#x}")]
    UnknownHint(VirtAddr),
    #[error("no live allocation at {0:#x}")]
    UnknownAllocation(VirtAddr),
    #[error("allocation at {0:#x} was already freed")]
    DoubleFree(VirtAddr),
    #[error("virtual address {0:#x} is not mapped")]
    Unmapped(VirtAddr),
    #[error("simulated memory exhausted")]
    Exhausted,
    #[error("subarray {0} is not part of the pool")]
    ForeignSubarray(GlobalSubarrayId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{kind} takes {expected} operands, got {actual}")]
    Arity {
        kind: PudOpKind,
        expected: usize,
        actual: usize,
    },
    #[error("element count {count} exceeds operand {operand} length {length}")]
    ElementCount { count: u64, operand: usize, length: u64 },
    #[error("element count must be at least one byte")]
    Empty,
    #[error("operand {operand} has no translation at offset {offset:#x}")]
    Unresolvable { operand: usize, offset: u64 },
    #[error(transparent)]
    Address(#[from] AddressError),
}

/// Top-level error for the benchmark driver and CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
