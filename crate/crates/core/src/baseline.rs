//! Physical-placement models of the conventional allocators.
//!
//! `malloc` and `posix_memalign` hand out virtually contiguous memory whose
//! 4 KiB frames are scattered uniformly over the frame zone; `malloc` also
//! starts at a random 16-byte-granular offset into the first frame. The
//! huge-page allocator backs each request with its own physically contiguous,
//! 2 MiB-aligned pages taken in order from the huge-page zone.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dram::PhysAddr;
use crate::error::AllocError;
use crate::layout::{MemoryLayout, Zone};
use crate::puma::VirtAddr;

pub const FRAME_SIZE: u64 = 4096;
const MALLOC_GRANULE: u64 = 16;
const BASELINE_VIRTUAL_BASE: VirtAddr = 0x7f00_0000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    MallocSim,
    MemalignSim,
    HugepageSim,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::MallocSim,
        BaselineKind::MemalignSim,
        BaselineKind::HugepageSim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::MallocSim => "malloc",
            BaselineKind::MemalignSim => "memalign",
            BaselineKind::HugepageSim => "hugepage",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown baseline allocator `{s}`"))
    }
}

/// Physically contiguous piece of an allocation's backing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extent {
    pub physical_base: PhysAddr,
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineAllocation {
    pub kind: BaselineKind,
    pub virtual_base: VirtAddr,
    pub length: u64,
    /// Virtually consecutive extents covering exactly `backing_len` bytes.
    pub extents: Vec<Extent>,
    /// Bytes the allocation owns outright. Heap allocations own only what was
    /// requested; huge-page mappings own whole pages.
    pub backing_len: u64,
}

impl BaselineAllocation {
    /// Physical address at `offset` and how many bytes stay contiguous from it.
    pub fn translate(&self, offset: u64) -> Option<(PhysAddr, u64)> {
        let mut start = 0;
        for e in &self.extents {
            if offset < start + e.len {
                let within = offset - start;
                return Some((e.physical_base + within, e.len - within));
            }
            start += e.len;
        }
        None
    }

    pub fn frames(&self) -> Vec<PhysAddr> {
        self.extents
            .iter()
            .map(|e| e.physical_base - e.physical_base % FRAME_SIZE)
            .collect()
    }
}

/// Free 4 KiB frames of a zone, drawn uniformly at random.
#[derive(Debug, Clone)]
pub struct FramePool {
    zone: Zone,
    frame_size: u64,
    used: HashSet<u64>,
    rng: ChaCha8Rng,
}

impl FramePool {
    pub fn new(zone: Zone, frame_size: u64, seed: u64) -> Self {
        FramePool {
            zone,
            frame_size,
            used: HashSet::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn frame_count(&self) -> u64 {
        self.zone.len / self.frame_size
    }

    pub fn free_frames(&self) -> u64 {
        self.frame_count() - self.used.len() as u64
    }

    pub fn draw(&mut self) -> Result<PhysAddr, AllocError> {
        let n = self.frame_count();
        if self.used.len() as u64 >= n {
            return Err(AllocError::Exhausted);
        }
        let mut idx = self.rng.gen_range(0..n);
        if self.used.len() as u64 * 2 > n {
            // dense pool: walk to the next free frame instead of rejecting
            while self.used.contains(&idx) {
                idx = (idx + 1) % n;
            }
        } else {
            while self.used.contains(&idx) {
                idx = self.rng.gen_range(0..n);
            }
        }
        self.used.insert(idx);
        Ok(self.zone.base + idx * self.frame_size)
    }
}

/// One baseline allocator instance with its own frames and huge pages.
#[derive(Debug, Clone)]
pub struct BaselineAllocator {
    kind: BaselineKind,
    frames: FramePool,
    huge_zone: Zone,
    huge_page_size: u64,
    next_huge: u64,
    huge_left: u64,
    rng: ChaCha8Rng,
    next_va: VirtAddr,
}

impl BaselineAllocator {
    pub fn new(kind: BaselineKind, layout: &MemoryLayout, huge_page_size: u64, seed: u64) -> Self {
        Self::with_frame_size(kind, layout, huge_page_size, FRAME_SIZE, seed)
    }

    pub fn with_frame_size(
        kind: BaselineKind,
        layout: &MemoryLayout,
        huge_page_size: u64,
        frame_size: u64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame_seed = rng.gen();
        let huge_pages = layout.huge_pages.len / huge_page_size;
        // the seed picks where the sequential run of huge pages starts
        let next_huge = if huge_pages > 0 {
            rng.gen_range(0..huge_pages)
        } else {
            0
        };
        BaselineAllocator {
            kind,
            frames: FramePool::new(layout.frames, frame_size, frame_seed),
            huge_zone: layout.huge_pages,
            huge_page_size,
            next_huge,
            huge_left: huge_pages,
            rng,
            next_va: BASELINE_VIRTUAL_BASE,
        }
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn alloc(&mut self, size: u64) -> Result<BaselineAllocation, AllocError> {
        if size == 0 {
            return Err(AllocError::ZeroSize);
        }
        match self.kind {
            BaselineKind::MallocSim => {
                let granules = self.frames.frame_size / MALLOC_GRANULE;
                let offset = self.rng.gen_range(0..granules) * MALLOC_GRANULE;
                self.alloc_frames(size, offset)
            }
            BaselineKind::MemalignSim => self.alloc_frames(size, 0),
            BaselineKind::HugepageSim => self.alloc_huge(size),
        }
    }

    fn alloc_frames(&mut self, size: u64, offset: u64) -> Result<BaselineAllocation, AllocError> {
        let fs = self.frames.frame_size;
        let count = (offset + size).div_ceil(fs);
        if count > self.frames.free_frames() {
            return Err(AllocError::Exhausted);
        }
        let mut extents = Vec::with_capacity(count as usize);
        let mut remaining = size;
        for k in 0..count {
            let frame = self.frames.draw()?;
            let skip = if k == 0 { offset } else { 0 };
            let len = (fs - skip).min(remaining);
            extents.push(Extent {
                physical_base: frame + skip,
                len,
            });
            remaining -= len;
        }
        let virtual_base = self.next_va + offset;
        self.next_va += count * fs;
        Ok(BaselineAllocation {
            kind: self.kind,
            virtual_base,
            length: size,
            extents,
            backing_len: size,
        })
    }

    fn alloc_huge(&mut self, size: u64) -> Result<BaselineAllocation, AllocError> {
        let hp = self.huge_page_size;
        let pages = size.div_ceil(hp);
        let zone_pages = self.huge_zone.len / hp;
        if pages > self.huge_left || pages > zone_pages {
            return Err(AllocError::Exhausted);
        }
        if self.next_huge + pages > zone_pages {
            // wrap to the start of the zone; the run must stay contiguous
            self.huge_left -= zone_pages - self.next_huge;
            self.next_huge = 0;
            if pages > self.huge_left {
                return Err(AllocError::Exhausted);
            }
        }
        let base = self.huge_zone.base + self.next_huge * hp;
        self.next_huge += pages;
        self.huge_left -= pages;
        let virtual_base = self.next_va.next_multiple_of(hp);
        self.next_va = virtual_base + pages * hp;
        Ok(BaselineAllocation {
            kind: self.kind,
            virtual_base,
            length: size,
            extents: vec![Extent {
                physical_base: base,
                len: pages * hp,
            }],
            backing_len: pages * hp,
        })
    }
}

/// Single allocation from a fresh allocator seeded with `seed`.
pub fn baseline_alloc(
    kind: BaselineKind,
    size: u64,
    seed: u64,
    layout: &MemoryLayout,
    huge_page_size: u64,
) -> Result<BaselineAllocation, AllocError> {
    BaselineAllocator::new(kind, layout, huge_page_size, seed).alloc(size)
}
