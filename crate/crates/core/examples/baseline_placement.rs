//! How often conventional allocators place a bulk operation's operands so it
//! can run in DRAM, under two address mappings.

use puma_sim::bench::{self, AllocatorKind, Benchmark};
use puma_sim::config::SimConfig;
use puma_sim::dram::{Field, MappingEntry};

fn mean_fraction(
    config: &SimConfig,
    b: Benchmark,
    a: AllocatorKind,
    bits: u64,
    trials: u64,
) -> Result<f64, puma_sim::Error> {
    let setup = config.build()?;
    let mut sum = 0.0;
    for seed in 0..trials {
        sum += bench::measure(&setup, b, a, bits, seed, false)?.pim_fraction;
    }
    Ok(sum / trials as f64)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let linear = SimConfig::default();
    let interleaved = SimConfig {
        mapping: Some(vec![
            MappingEntry::new(Field::Column, 0, 9),
            MappingEntry::new(Field::Bank, 10, 12),
            MappingEntry::new(Field::Row, 13, 22),
            MappingEntry::new(Field::Subarray, 23, 32),
        ]),
        ..SimConfig::default()
    };

    let bits = 32 * 1024;
    for (label, config) in [("linear", &linear), ("bank-interleaved", &interleaved)] {
        println!("{label} mapping, {bits}-bit operands, 200 seeds");
        for a in AllocatorKind::ALL {
            let mut row = format!("  {:<9}", a.name());
            for b in Benchmark::ALL {
                let f = mean_fraction(config, b, a, bits, 200)?;
                row.push_str(&format!(" {b}={:>5.1}%", f * 100.0));
            }
            println!("{row}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
