//! Processing-using-DRAM memory allocation simulator.
//!
//! Physical addresses are decoded into DRAM coordinates by a configurable
//! bit mapping. A pool of huge pages is split into row-sized regions indexed
//! by subarray, and the PUMA allocator hands those out so that operands of a
//! bulk operation land in the same subarrays. Simulated malloc, memalign and
//! huge-page allocators serve as baselines, and an executability checker plus
//! a small cost model turn operand layouts into latencies.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod baseline;
pub mod bench;
pub mod chart;
pub mod config;
pub mod dram;
pub mod engine;
pub mod error;
pub mod layout;
pub mod pool;
pub mod puma;

pub use baseline::{baseline_alloc, BaselineAllocation, BaselineAllocator, BaselineKind};
pub use bench::{
    emit_csv, run_microbenchmark, run_repeated, size_grid, sweep, AllocatorKind, BenchRecord, BenchSpec, Benchmark,
    RunStatus,
};
pub use config::{Setup, SimConfig};
pub use dram::{AddressMapping, BitRange, DramCoordinate, DramGeometry, Field, GlobalSubarrayId, MappingEntry};
pub use engine::{check_executability, execute, CostModel, ExecutabilityReport, PudOpKind, PudOperation};
pub use error::{AddressError, AllocError, ConfigError, EngineError, Error};
pub use layout::{MemoryLayout, Zone};
pub use pool::{split_huge_page, HugePage, MemoryRegion, PhysicalPool, PoolConfig, PoolReport};
pub use puma::{Allocation, PumaAllocator, TraceEvent, VirtAddr};
