//! Reserve huge pages into the PUMA pool and look at how they break down
//! into row-sized regions per subarray.

use puma_sim::dram::{AddressMapping, DramGeometry};
use puma_sim::layout::MemoryLayout;
use puma_sim::pool::{split_huge_page, HugePage, PhysicalPool, Placement, PoolConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = DramGeometry::default();
    let mapping = AddressMapping::linear(geometry)?;

    let page = HugePage {
        index: 0,
        physical_base: 0,
        size: 2 << 20,
    };
    let regions = split_huge_page(&page, &mapping, 0);
    println!(
        "one 2 MiB page -> {} regions of {} B, first in {}, last in {}",
        regions.len(),
        regions[0].size,
        regions[0].subarray,
        regions.last().map(|r| r.subarray).unwrap()
    );

    let layout = MemoryLayout::for_geometry(&geometry);
    let config = PoolConfig {
        placement: Placement::Randomized { seed: 7 },
        ..PoolConfig::default()
    };
    let mut pool = PhysicalPool::new(mapping, layout.puma_pool, config)?;
    let report = pool.preallocate(4)?;
    print!("{report}");
    let largest = pool.max_free_subarray().expect("pool is not empty");
    println!("largest free subarray: {largest}");
    let r = pool.take_region(largest).unwrap();
    println!("took {} row {} at {:#x}", r.subarray, r.row, r.physical_base);
    pool.release_region(&r)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
