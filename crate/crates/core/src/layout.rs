//! Partition of simulated physical memory between the allocators.
//!
//! The PUMA pool, the huge-page baseline and the 4 KiB frame baselines each
//! draw from their own zone so that comparisons never contend.

use crate::dram::{DramGeometry, PhysAddr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone {
    pub base: PhysAddr,
    pub len: u64,
}

impl Zone {
    pub fn end(&self) -> PhysAddr {
        self.base + self.len
    }

    pub fn contains(&self, addr: PhysAddr) -> bool {
        addr >= self.base && addr < self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryLayout {
    /// First quarter of memory.
    pub puma_pool: Zone,
    /// Second quarter.
    pub huge_pages: Zone,
    /// Upper half.
    pub frames: Zone,
}

impl MemoryLayout {
    pub fn for_geometry(geometry: &DramGeometry) -> Self {
        let total = geometry.total_capacity();
        let quarter = total / 4;
        MemoryLayout {
            puma_pool: Zone { base: 0, len: quarter },
            huge_pages: Zone {
                base: quarter,
                len: quarter,
            },
            frames: Zone {
                base: 2 * quarter,
                len: total - 2 * quarter,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zones_are_disjoint_and_cover_memory() {
        let g = DramGeometry::default();
        let l = MemoryLayout::for_geometry(&g);
        assert_eq!(l.puma_pool.end(), l.huge_pages.base);
        assert_eq!(l.huge_pages.end(), l.frames.base);
        assert_eq!(l.frames.end(), g.total_capacity());
        assert!(l.frames.contains(4 << 30));
        assert!(!l.puma_pool.contains(2 << 30));
    }
}
