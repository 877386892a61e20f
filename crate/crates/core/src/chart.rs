//! Minimal SVG line charts of mean speedup over malloc against size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bench::{AllocatorKind, BenchRecord, Benchmark, RunStatus};
use crate::error::Error;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

/// Mean speedup per size for one benchmark and allocator, skipping failed runs.
pub fn mean_speedups(records: &[BenchRecord], benchmark: Benchmark, allocator: AllocatorKind) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64, u32)> = Vec::new();
    for r in records
        .iter()
        .filter(|r| r.benchmark == benchmark && r.allocator == allocator && r.status == RunStatus::Ok)
    {
        match out.iter_mut().find(|(s, _, _)| *s == r.size_bits) {
            Some(e) => {
                e.1 += r.speedup_vs_malloc;
                e.2 += 1;
            }
            None => out.push((r.size_bits, r.speedup_vs_malloc, 1)),
        }
    }
    out.sort_by_key(|e| e.0);
    out.into_iter().map(|(s, sum, n)| (s, sum / n as f64)).collect()
}

/// Renders one benchmark; both axes are log-scaled.
pub fn render_svg(records: &[BenchRecord], benchmark: Benchmark) -> String {
    let series: Vec<(AllocatorKind, Vec<(u64, f64)>)> = AllocatorKind::ALL
        .into_iter()
        .map(|a| (a, mean_speedups(records, benchmark, a)))
        .filter(|(_, pts)| !pts.is_empty())
        .collect();
    let xs = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|&(s, _)| (s as f64).log10()));
    let ys = series
        .iter()
        .flat_map(|(_, p)| p.iter().map(|&(_, v)| v.max(1e-3).log10()));
    let (x0, x1) = bounds(xs);
    let (y0, y1) = bounds(ys.chain([0.0]));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{benchmark}: speedup over malloc</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">size (bits, log)</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">speedup (log)</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#999" stroke-dasharray="4 3"/>"##,
        MARGIN,
        W - MARGIN,
        y = py(0.0)
    );
    for (i, (alloc, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(s, v)| format!("{:.1},{:.1}", px((s as f64).log10()), py(v.max(1e-3).log10())))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{alloc}</text>"#,
            W - MARGIN - 70.0,
            MARGIN + 16.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Writes `<dir>/<benchmark>.svg` for every benchmark; returns the paths.
pub fn write_charts(records: &[BenchRecord], dir: &Path) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Benchmark::ALL
        .into_iter()
        .map(|b| {
            let path = dir.join(format!("{b}.svg"));
            std::fs::write(&path, render_svg(records, b)).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
