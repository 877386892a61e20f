//! Check a copy slot by slot, first with PUMA operands, then with one
//! operand from a malloc-like heap, and price both.

use puma_sim::baseline::{BaselineAllocator, BaselineKind};
use puma_sim::dram::{AddressMapping, DramGeometry};
use puma_sim::engine::{check_executability, execute, CostModel, OperandLayout, PudOpKind, PudOperation};
use puma_sim::layout::MemoryLayout;
use puma_sim::pool::DEFAULT_HUGE_PAGE_SIZE;
use puma_sim::puma::PumaAllocator;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = DramGeometry::default();
    let mapping = AddressMapping::linear(geometry)?;
    let cost = CostModel::default();
    let size = 3 * 1024 + 100;

    let mut puma = PumaAllocator::with_defaults(mapping.clone())?;
    puma.pim_preallocate(1)?;
    let src = puma.pim_alloc(size)?;
    let dst = puma.pim_alloc_align(size, src.virtual_base)?;

    let mut heap = BaselineAllocator::new(
        BaselineKind::MallocSim,
        &MemoryLayout::for_geometry(&geometry),
        DEFAULT_HUGE_PAGE_SIZE,
        3,
    );
    let scattered = heap.alloc(size)?;

    let cases: [(&str, [&dyn OperandLayout; 2]); 2] =
        [("puma -> puma", [&src, &dst]), ("puma -> malloc", [&src, &scattered])];
    for (label, ops) in cases {
        let op = PudOperation::new(PudOpKind::RowCopy, ops.to_vec(), size)?;
        let report = check_executability(&op, &mapping)?;
        println!(
            "{label}: {:.0}% in DRAM, latency {:.0} ns",
            report.pim_fraction() * 100.0,
            execute(&report, &cost)
        );
        print!("{}", report.to_csv());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
