//! Decode physical addresses under the default linear mapping and under a
//! bank-interleaved one, and show how a broken mapping is rejected.

use puma_sim::dram::{AddressMapping, DramGeometry, Field, MappingEntry};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let geometry = DramGeometry::default();
    let linear = AddressMapping::linear(geometry)?;
    println!(
        "default mapping, {} GiB, {} subarrays",
        geometry.total_capacity() >> 30,
        geometry.subarray_count()
    );
    for addr in [0x0u64, 0x400, 0x10_0000, 0x1_2345_6789] {
        let c = linear.decode(addr)?;
        println!("  {addr:#011x} -> {c}  ({})", linear.subarray_id_of(&c));
    }

    // consecutive rows rotate over the banks
    let interleaved = AddressMapping::new(
        geometry,
        vec![
            MappingEntry::new(Field::Column, 0, 9),
            MappingEntry::new(Field::Bank, 10, 12),
            MappingEntry::new(Field::Row, 13, 22),
            MappingEntry::new(Field::Subarray, 23, 32),
        ],
    )?;
    println!("bank-interleaved mapping");
    for row in 0..4u64 {
        let addr = row * 1024;
        let c = interleaved.decode(addr)?;
        println!("  {addr:#011x} -> {c}  ({})", interleaved.subarray_id_of(&c));
    }
    let back = interleaved.encode(&interleaved.decode(0x1_2345_6789)?)?;
    assert_eq!(back, 0x1_2345_6789);

    // bank needs three bits; stopping at bit 31 leaves bit 32 unassigned
    let bad = AddressMapping::new(
        geometry,
        vec![
            MappingEntry::new(Field::Column, 0, 9),
            MappingEntry::new(Field::Row, 10, 19),
            MappingEntry::new(Field::Subarray, 20, 29),
            MappingEntry::new(Field::Bank, 30, 31),
        ],
    );
    println!("rejected: {}", bad.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
