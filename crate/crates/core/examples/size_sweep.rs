//! A reduced sweep from an inline TOML config, written as CSV plus SVG charts.

use puma_sim::bench::{self, AllocatorKind, Benchmark};
use puma_sim::chart;
use puma_sim::config::SimConfig;

const CONFIG: &str = r#"
[pool]
pages = 4

[sweep]
min_bits = 2000
max_bits = 1048576
points = 6
repetitions = 2
seed = 1
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SimConfig::from_toml_str(CONFIG)?.build()?;
    let records = bench::sweep(&setup)?;

    let dir = std::env::temp_dir().join("puma-sim-size-sweep");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("sweep.csv");
    bench::emit_csv(&records, &csv)?;
    let charts = chart::write_charts(&records, &dir)?;
    println!(
        "{} records -> {}, {} charts",
        records.len(),
        csv.display(),
        charts.len()
    );

    for b in Benchmark::ALL {
        let means = chart::mean_speedups(&records, b, AllocatorKind::Puma);
        let shown: Vec<String> = means.iter().map(|(s, v)| format!("{s}:{v:.2}x")).collect();
        println!("  {b:<4} puma {}", shown.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
