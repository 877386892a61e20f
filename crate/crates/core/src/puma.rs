//! The PUMA allocator: pre-allocation, worst-fit first allocation and
//! hint-aligned allocation over a [`PhysicalPool`].
//!
//! Every allocation is backed by whole regions (DRAM rows) and mapped into a
//! fresh, contiguous range of a simulated virtual address space. Allocations
//! are all-or-nothing: if the pool runs dry part-way, everything taken for
//! that request goes back to the free table.
//!
//! ```
//! use puma_sim::dram::{AddressMapping, DramGeometry};
//! use puma_sim::puma::PumaAllocator;
//!
//! let mapping = AddressMapping::linear(DramGeometry::default()).unwrap();
//! let mut puma = PumaAllocator::with_defaults(mapping).unwrap();
//! puma.pim_preallocate(1).unwrap();
//! let a = puma.pim_alloc(4096).unwrap();
//! let b = puma.pim_alloc_align(4096, a.virtual_base).unwrap();
//! for (x, y) in a.regions.iter().zip(&b.regions) {
//!     assert_eq!(x.subarray, y.subarray);
//! }
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::dram::{AddressMapping, GlobalSubarrayId, PhysAddr};
use crate::error::{AllocError, ConfigError};
use crate::layout::MemoryLayout;
use crate::pool::{MemoryRegion, PhysicalPool, PoolConfig, PoolReport, RegionId};

pub type VirtAddr = u64;

/// First virtual address handed out.
pub const VIRTUAL_BASE: VirtAddr = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AllocationId(pub u64);

/// A virtually contiguous allocation backed by an ordered list of regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub id: AllocationId,
    pub virtual_base: VirtAddr,
    /// Requested size in bytes.
    pub length: u64,
    pub regions: Vec<MemoryRegion>,
}

impl Allocation {
    pub fn backing_size(&self) -> u64 {
        self.regions.iter().map(|r| r.size).sum()
    }

    pub fn subarrays(&self) -> Vec<GlobalSubarrayId> {
        self.regions.iter().map(|r| r.subarray).collect()
    }
}

/// Allocations indexed by their virtual base address.
#[derive(Debug, Clone, Default)]
pub struct AllocationTable {
    map: HashMap<VirtAddr, Allocation>,
}

impl AllocationTable {
    pub fn get(&self, virtual_base: VirtAddr) -> Option<&Allocation> {
        self.map.get(&virtual_base)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Allocation> {
        self.map.values()
    }

    fn insert(&mut self, a: Allocation) {
        self.map.insert(a.virtual_base, a);
    }

    fn remove(&mut self, virtual_base: VirtAddr) -> Option<Allocation> {
        self.map.remove(&virtual_base)
    }
}

/// Monotone virtual address space; each mapped slot is one region.
#[derive(Debug, Clone)]
pub struct VirtualAddressSpace {
    next: VirtAddr,
    region_size: u64,
    slots: HashMap<u64, RegionId>,
}

impl VirtualAddressSpace {
    fn new(region_size: u64) -> Self {
        VirtualAddressSpace {
            next: VIRTUAL_BASE,
            region_size,
            slots: HashMap::new(),
        }
    }

    /// Maps `regions` back to back at a fresh base.
    fn map(&mut self, regions: &[MemoryRegion]) -> VirtAddr {
        let base = self.next;
        let first_slot = base / self.region_size;
        for (k, r) in regions.iter().enumerate() {
            self.slots.insert(first_slot + k as u64, r.id);
        }
        self.next += regions.len() as u64 * self.region_size;
        base
    }

    fn unmap(&mut self, base: VirtAddr, count: usize) {
        let first_slot = base / self.region_size;
        for k in 0..count as u64 {
            self.slots.remove(&(first_slot + k));
        }
    }

    pub fn translate(&self, va: VirtAddr) -> Option<(RegionId, u64)> {
        self.slots
            .get(&(va / self.region_size))
            .map(|id| (*id, va % self.region_size))
    }

    pub fn mapped_slots(&self) -> usize {
        self.slots.len()
    }
}

/// How a region was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawPath {
    /// Worst-fit: the subarray with the most free regions.
    WorstFit,
    /// Same subarray as the hint's region at this position.
    Aligned { hint: GlobalSubarrayId },
    /// Hint's subarray was exhausted; worst-fit instead.
    Fallback { hint: GlobalSubarrayId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Draw {
    pub path: DrawPath,
    pub subarray: GlobalSubarrayId,
    pub row: u64,
}

/// One line of the allocator trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Preallocate {
        pages: usize,
        counts: Vec<(GlobalSubarrayId, usize)>,
    },
    /// `virtual_base` is `None` when the request failed and was rolled back.
    Alloc {
        size: u64,
        virtual_base: Option<VirtAddr>,
        draws: Vec<Draw>,
    },
    AllocAlign {
        size: u64,
        hint: VirtAddr,
        virtual_base: Option<VirtAddr>,
        draws: Vec<Draw>,
    },
    Free {
        virtual_base: VirtAddr,
        released: Vec<(GlobalSubarrayId, u64)>,
    },
}

fn write_draws(f: &mut fmt::Formatter<'_>, draws: &[Draw]) -> fmt::Result {
    write!(f, " subarrays=[")?;
    for (i, d) in draws.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        let tag = match d.path {
            DrawPath::WorstFit => "w",
            DrawPath::Aligned { .. } => "a",
            DrawPath::Fallback { .. } => "f",
        };
        write!(f, "{}:{}{}", d.subarray.0, d.row, tag)?;
    }
    f.write_str("]")
}

fn write_outcome(f: &mut fmt::Formatter<'_>, va: Option<VirtAddr>) -> fmt::Result {
    match va {
        Some(va) => write!(f, " va={va:#x}"),
        None => write!(f, " failed"),
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Preallocate { pages, counts } => {
                write!(f, "preallocate pages={pages} subarrays={}", counts.len())
            }
            TraceEvent::Alloc {
                size,
                virtual_base,
                draws,
            } => {
                write!(f, "alloc size={size}")?;
                write_outcome(f, *virtual_base)?;
                write_draws(f, draws)
            }
            TraceEvent::AllocAlign {
                size,
                hint,
                virtual_base,
                draws,
            } => {
                write!(f, "alloc_align size={size} hint={hint:#x}")?;
                write_outcome(f, *virtual_base)?;
                write_draws(f, draws)
            }
            TraceEvent::Free { virtual_base, released } => {
                write!(f, "free va={virtual_base:#x} regions={}", released.len())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PumaAllocator {
    pool: PhysicalPool,
    initialized: bool,
    table: AllocationTable,
    vas: VirtualAddressSpace,
    freed: HashSet<VirtAddr>,
    next_id: u64,
    tracing: bool,
    trace: Vec<TraceEvent>,
}

impl PumaAllocator {
    pub fn new(pool: PhysicalPool) -> Self {
        let region_size = pool.region_size();
        PumaAllocator {
            pool,
            initialized: false,
            table: AllocationTable::default(),
            vas: VirtualAddressSpace::new(region_size),
            freed: HashSet::new(),
            next_id: 0,
            tracing: false,
            trace: Vec::new(),
        }
    }

    /// Allocator over the default pool zone with 2 MiB pages placed sequentially.
    pub fn with_defaults(mapping: AddressMapping) -> Result<Self, ConfigError> {
        let zone = MemoryLayout::for_geometry(mapping.geometry()).puma_pool;
        Ok(Self::new(PhysicalPool::new(mapping, zone, PoolConfig::default())?))
    }

    pub fn set_tracing(&mut self, on: bool) {
        self.tracing = on;
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn pool(&self) -> &PhysicalPool {
        &self.pool
    }

    pub fn table(&self) -> &AllocationTable {
        &self.table
    }

    pub fn address_space(&self) -> &VirtualAddressSpace {
        &self.vas
    }

    pub fn region_size(&self) -> u64 {
        self.pool.region_size()
    }

    fn log(&mut self, event: TraceEvent) {
        if self.tracing {
            self.trace.push(event);
        }
    }

    pub fn pim_preallocate(&mut self, n_pages: usize) -> Result<PoolReport, AllocError> {
        if self.initialized {
            return Err(AllocError::AlreadyInitialized);
        }
        let report = self.pool.preallocate(n_pages)?;
        self.initialized = true;
        self.log(TraceEvent::Preallocate {
            pages: n_pages,
            counts: self.pool.table().counts().collect(),
        });
        Ok(report)
    }

    fn check_request(&self, size: u64) -> Result<usize, AllocError> {
        if !self.initialized {
            return Err(AllocError::NotInitialized);
        }
        if size == 0 {
            return Err(AllocError::ZeroSize);
        }
        Ok(size.div_ceil(self.region_size()) as usize)
    }

    fn take_worst_fit(&mut self, path: DrawPath, draws: &mut Vec<Draw>) -> Option<MemoryRegion> {
        let sa = self.pool.max_free_subarray()?;
        let r = self.pool.take_region(sa).expect("max subarray has a free region");
        draws.push(Draw {
            path,
            subarray: r.subarray,
            row: r.row,
        });
        Some(r)
    }

    fn rollback(&mut self, taken: &[MemoryRegion]) {
        for r in taken.iter().rev() {
            self.pool.release_region(r).expect("region taken by this request");
        }
    }

    fn commit(&mut self, length: u64, regions: Vec<MemoryRegion>) -> Allocation {
        let virtual_base = self.vas.map(&regions);
        let a = Allocation {
            id: AllocationId(self.next_id),
            virtual_base,
            length,
            regions,
        };
        self.next_id += 1;
        self.table.insert(a.clone());
        a
    }

    /// First allocation: every region comes from the subarray with the most
    /// free regions at the moment it is taken.
    pub fn pim_alloc(&mut self, size: u64) -> Result<Allocation, AllocError> {
        let needed = self.check_request(size)?;
        let mut taken = Vec::with_capacity(needed);
        let mut draws = Vec::with_capacity(needed);
        while taken.len() < needed {
            match self.take_worst_fit(DrawPath::WorstFit, &mut draws) {
                Some(r) => taken.push(r),
                None => {
                    self.rollback(&taken);
                    self.log(TraceEvent::Alloc {
                        size,
                        virtual_base: None,
                        draws,
                    });
                    return Err(AllocError::OutOfMemory {
                        needed,
                        obtained: taken.len(),
                    });
                }
            }
        }
        let a = self.commit(size, taken);
        self.log(TraceEvent::Alloc {
            size,
            virtual_base: Some(a.virtual_base),
            draws,
        });
        Ok(a)
    }

    /// Aligned allocation: region `i` is placed in the subarray of the hint's
    /// region `i` when that subarray still has a free row, otherwise by
    /// worst-fit. Positions past the end of the hint use worst-fit.
    pub fn pim_alloc_align(&mut self, size: u64, hint: VirtAddr) -> Result<Allocation, AllocError> {
        let needed = self.check_request(size)?;
        let hint_subarrays = match self.table.get(hint) {
            Some(h) => h.subarrays(),
            None => return Err(AllocError::UnknownHint(hint)),
        };
        let mut taken = Vec::with_capacity(needed);
        let mut draws = Vec::with_capacity(needed);
        for i in 0..needed {
            let got = match hint_subarrays.get(i) {
                Some(&sa) => match self.pool.take_region(sa) {
                    Some(r) => {
                        draws.push(Draw {
                            path: DrawPath::Aligned { hint: sa },
                            subarray: r.subarray,
                            row: r.row,
                        });
                        Some(r)
                    }
                    None => self.take_worst_fit(DrawPath::Fallback { hint: sa }, &mut draws),
                },
                None => self.take_worst_fit(DrawPath::WorstFit, &mut draws),
            };
            match got {
                Some(r) => taken.push(r),
                None => {
                    self.rollback(&taken);
                    self.log(TraceEvent::AllocAlign {
                        size,
                        hint,
                        virtual_base: None,
                        draws,
                    });
                    return Err(AllocError::OutOfMemory {
                        needed,
                        obtained: taken.len(),
                    });
                }
            }
        }
        let a = self.commit(size, taken);
        self.log(TraceEvent::AllocAlign {
            size,
            hint,
            virtual_base: Some(a.virtual_base),
            draws,
        });
        Ok(a)
    }

    pub fn pim_free(&mut self, virtual_base: VirtAddr) -> Result<(), AllocError> {
        let a = match self.table.remove(virtual_base) {
            Some(a) => a,
            None if self.freed.contains(&virtual_base) => return Err(AllocError::DoubleFree(virtual_base)),
            None => return Err(AllocError::UnknownAllocation(virtual_base)),
        };
        for r in &a.regions {
            self.pool.release_region(r)?;
        }
        self.vas.unmap(a.virtual_base, a.regions.len());
        self.freed.insert(virtual_base);
        self.log(TraceEvent::Free {
            virtual_base,
            released: a.regions.iter().map(|r| (r.subarray, r.row)).collect(),
        });
        Ok(())
    }

    pub fn resolve(&self, va: VirtAddr) -> Result<PhysAddr, AllocError> {
        let (id, offset) = self.vas.translate(va).ok_or(AllocError::Unmapped(va))?;
        Ok(self.pool.region(id).physical_base + offset)
    }
}
