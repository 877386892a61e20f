//! Shared fixtures: a 2 MiB toy system with a deliberately scattered mapping.
#![allow(dead_code)]

use puma_sim::dram::{AddressMapping, DramGeometry, Field, MappingEntry};
use puma_sim::layout::MemoryLayout;
use puma_sim::pool::{PhysicalPool, Placement, PoolConfig};
use puma_sim::puma::PumaAllocator;

/// 2 channels, 2 ranks, 4 banks, 8 subarrays of 64 rows x 256 bytes.
pub fn toy_geometry() -> DramGeometry {
    DramGeometry {
        channels: 2,
        ranks_per_channel: 2,
        banks_per_rank: 4,
        subarrays_per_bank: 8,
        rows_per_subarray: 64,
        columns_per_row: 256,
        bytes_per_column: 1,
    }
}

/// Row and bank bits are split into two ranges each.
pub fn toy_entries() -> Vec<MappingEntry> {
    vec![
        MappingEntry::new(Field::Column, 0, 7),
        MappingEntry::new(Field::Bank, 8, 8),
        MappingEntry::new(Field::Row, 9, 11),
        MappingEntry::new(Field::Channel, 12, 12),
        MappingEntry::new(Field::Row, 13, 15),
        MappingEntry::new(Field::Subarray, 16, 18),
        MappingEntry::new(Field::Rank, 19, 19),
        MappingEntry::new(Field::Bank, 20, 20),
    ]
}

pub fn toy_mapping() -> AddressMapping {
    AddressMapping::new(toy_geometry(), toy_entries()).unwrap()
}

pub fn toy_layout() -> MemoryLayout {
    MemoryLayout::for_geometry(&toy_geometry())
}

pub const TOY_HUGE_PAGE: u64 = 64 * 1024;

pub fn toy_pool(placement: Placement) -> PhysicalPool {
    let config = PoolConfig {
        huge_page_size: TOY_HUGE_PAGE,
        max_pages: None,
        placement,
    };
    PhysicalPool::new(toy_mapping(), toy_layout().puma_pool, config).unwrap()
}

pub fn toy_puma(placement: Placement) -> PumaAllocator {
    PumaAllocator::new(toy_pool(placement))
}
