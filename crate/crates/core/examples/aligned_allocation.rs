//! Allocate the three operands of a bulk AND with PUMA and print the
//! allocator trace: the first operand by worst-fit, the others mirrored.

use puma_sim::dram::{AddressMapping, DramGeometry};
use puma_sim::puma::PumaAllocator;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mapping = AddressMapping::linear(DramGeometry::default())?;
    let mut puma = PumaAllocator::with_defaults(mapping)?;
    puma.set_tracing(true);
    puma.pim_preallocate(2)?;

    let a = puma.pim_alloc(5000)?;
    let b = puma.pim_alloc_align(5000, a.virtual_base)?;
    let c = puma.pim_alloc_align(5000, a.virtual_base)?;
    for (name, x) in [("a", &a), ("b", &b), ("c", &c)] {
        let sas: Vec<String> = x.subarrays().iter().map(|s| s.to_string()).collect();
        println!(
            "{name}: va {:#x}, {} regions in [{}]",
            x.virtual_base,
            x.regions.len(),
            sas.join(" ")
        );
    }
    assert_eq!(a.subarrays(), b.subarrays());
    assert_eq!(a.subarrays(), c.subarrays());

    // byte 1500 of b lives in its second region
    println!("b+1500 -> physical {:#x}", puma.resolve(b.virtual_base + 1500)?);

    puma.pim_free(b.virtual_base)?;
    println!("freeing b twice: {}", puma.pim_free(b.virtual_base).unwrap_err());
    for line in puma.trace() {
        println!("  {line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
