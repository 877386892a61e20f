//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p puma-sim --test acceptance`.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use puma_sim::baseline::{BaselineAllocator, BaselineKind};
use puma_sim::bench::{self, AllocatorKind, Benchmark, RunStatus};
use puma_sim::config::{Setup, SimConfig};
use puma_sim::dram::{AddressMapping, DramCoordinate, DramGeometry, Field, GlobalSubarrayId, PhysAddr};
use puma_sim::engine::{check_executability, FallbackReason, OperandLayout, PudOpKind, PudOperation, Verdict};
use puma_sim::pool::{split_huge_page, HugePage, Placement};
use puma_sim::puma::{Draw, DrawPath, PumaAllocator, TraceEvent, VirtAddr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn default_setup() -> Setup {
    SimConfig::default().build().unwrap()
}

// ---------------------------------------------------------------- C1

fn c1_address_model() -> Vec<Outcome> {
    let start = Instant::now();
    let mut problems = Vec::new();

    // default 8 GiB: 10^5 random addresses
    let m = AddressMapping::linear(DramGeometry::default()).unwrap();
    let g = *m.geometry();
    let cap = g.total_capacity();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for _ in 0..100_000 {
        let a = rng.gen_range(0..cap);
        let c = m.decode(a).unwrap();
        if m.encode(&c).unwrap() != a {
            problems.push(format!("default roundtrip failed at {a:#x}"));
            break;
        }
        let c2 = DramCoordinate {
            channel: rng.gen_range(0..g.channels),
            rank: rng.gen_range(0..g.ranks_per_channel),
            bank: rng.gen_range(0..g.banks_per_rank),
            subarray: rng.gen_range(0..g.subarrays_per_bank),
            row: rng.gen_range(0..g.rows_per_subarray),
            column_byte: rng.gen_range(0..g.row_bytes()),
        };
        if m.decode(m.encode(&c2).unwrap()).unwrap() != c2 {
            problems.push(format!("default coordinate roundtrip failed at {c2}"));
            break;
        }
    }
    // every global id is reached and names its own subarray
    let n_ids = g.subarray_count();
    if n_ids != 8192 {
        problems.push(format!("default has {n_ids} subarrays, expected 8192"));
    }
    for id in 0..n_ids as u32 {
        let coord = m.subarray_coordinate(GlobalSubarrayId(id));
        let base = m.encode(&coord).unwrap();
        if m.global_subarray_id(base).unwrap() != GlobalSubarrayId(id) {
            problems.push(format!("id S{id} does not roundtrip"));
            break;
        }
    }
    // bits outside the subarray-identifying fields set the size of each block
    let free_bits: u32 = m
        .entries()
        .iter()
        .filter(|e| matches!(e.field, Field::Row | Field::Column))
        .map(|e| e.bits[1] - e.bits[0] + 1)
        .sum();
    let per_subarray = 1u64 << free_bits;
    if per_subarray != g.subarray_bytes() || per_subarray * n_ids != cap {
        problems.push(format!(
            "default subarray size {per_subarray} B inconsistent with geometry"
        ));
    }

    // toy: exhaustive
    let t = common::toy_mapping();
    let tg = *t.geometry();
    let tcap = tg.total_capacity();
    let mut per_id: BTreeMap<u32, u64> = BTreeMap::new();
    let mut seen = vec![false; tcap as usize];
    for a in 0..tcap {
        let c = t.decode(a).unwrap();
        let back = t.encode(&c).unwrap();
        if back != a {
            problems.push(format!("toy roundtrip failed at {a:#x}"));
            break;
        }
        seen[back as usize] = true;
        *per_id.entry(t.subarray_id_of(&c).0).or_default() += 1;
    }
    if !seen.iter().all(|&s| s) {
        problems.push("toy encode is not onto".into());
    }
    let expected_ids = tg.channels * tg.ranks_per_channel * tg.banks_per_rank * tg.subarrays_per_bank;
    if per_id.len() as u64 != expected_ids
        || per_id.keys().copied().ne(0..expected_ids as u32)
        || per_id
            .values()
            .any(|&n| n != tg.rows_per_subarray * tg.columns_per_row * tg.bytes_per_column)
    {
        problems.push(format!("toy partition wrong: {} ids", per_id.len()));
    }

    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        problems.push(format!("took {elapsed:?} (limit 10 s)"));
    }
    let pass = problems.is_empty();
    let detail = if pass {
        format!(
            "1e5 default roundtrips, {tcap} toy addresses exhaustive, {n_ids} + {expected_ids} subarray blocks exact, {:.2} s",
            elapsed.as_secs_f64()
        )
    } else {
        problems.join("; ")
    };
    vec![outcome("C1", "address model soundness", pass, detail)]
}

// ---------------------------------------------------------------- C2

fn c2_region_split() -> Vec<Outcome> {
    let m = AddressMapping::linear(DramGeometry::default()).unwrap();
    let page = HugePage {
        index: 0,
        physical_base: 0,
        size: 2 << 20,
    };
    let regions = split_huge_page(&page, &m, 0);
    let mut per: BTreeMap<GlobalSubarrayId, usize> = BTreeMap::new();
    for r in &regions {
        *per.entry(r.subarray).or_default() += 1;
    }
    let pass = regions.len() == 2048
        && per.len() == 2
        && per.values().all(|&n| n == 1024)
        && regions.iter().all(|r| r.size == 1024);
    let counts: Vec<String> = per.iter().map(|(k, v)| format!("{k}={v}")).collect();
    vec![outcome(
        "C2",
        "region splitting",
        pass,
        format!("{} regions of 1 KiB, per subarray {}", regions.len(), counts.join(" ")),
    )]
}

// ---------------------------------------------------------------- C3

/// Free rows per subarray, rebuilt from the reserved pages by decoding every
/// row-sized chunk.
fn shadow_inventory(puma: &PumaAllocator) -> BTreeMap<GlobalSubarrayId, BTreeSet<u64>> {
    let m = puma.pool().mapping();
    let row = m.geometry().row_bytes();
    let mut inv: BTreeMap<GlobalSubarrayId, BTreeSet<u64>> = BTreeMap::new();
    for p in puma.pool().pages() {
        for off in (0..p.size).step_by(row as usize) {
            let c = m.decode(p.physical_base + off).unwrap();
            inv.entry(m.subarray_id_of(&c)).or_default().insert(c.row);
        }
    }
    inv
}

struct Shadow {
    free: BTreeMap<GlobalSubarrayId, BTreeSet<u64>>,
    live: HashMap<VirtAddr, Vec<(GlobalSubarrayId, u64)>>,
    violations: Vec<String>,
    worst_fit_checked: usize,
    aligned_checked: usize,
}

impl Shadow {
    fn max_count(&self) -> usize {
        self.free.values().map(|s| s.len()).max().unwrap_or(0)
    }

    fn take(&mut self, d: &Draw, ctx: &str) {
        let set = self.free.entry(d.subarray).or_default();
        if set.first() != Some(&d.row) {
            self.violations.push(format!(
                "{ctx}: drew row {} of {} but lowest free is {:?}",
                d.row,
                d.subarray,
                set.first()
            ));
        }
        set.remove(&d.row);
    }

    fn check_worst_fit(&mut self, d: &Draw, ctx: &str) {
        let max = self.max_count();
        let have = self.free.get(&d.subarray).map_or(0, |s| s.len());
        if have != max || max == 0 {
            self.violations.push(format!(
                "{ctx}: worst-fit took {} with {have} free, max is {max}",
                d.subarray
            ));
        }
        self.worst_fit_checked += 1;
        self.take(d, ctx);
    }

    fn replay(&mut self, ev: &TraceEvent) {
        match ev {
            TraceEvent::Preallocate { counts, .. } => {
                for (sa, n) in counts {
                    let have = self.free.get(sa).map_or(0, |s| s.len());
                    if have != *n {
                        self.violations
                            .push(format!("preallocate: {sa} reports {n}, inventory {have}"));
                    }
                }
            }
            TraceEvent::Alloc {
                virtual_base, draws, ..
            } => {
                let saved = self.free.clone();
                for d in draws {
                    if d.path != DrawPath::WorstFit {
                        self.violations.push("alloc: non worst-fit draw".into());
                    }
                    self.check_worst_fit(d, "alloc");
                }
                self.settle(saved, *virtual_base, draws);
            }
            TraceEvent::AllocAlign {
                hint,
                virtual_base,
                draws,
                ..
            } => {
                let saved = self.free.clone();
                let hint_sas: Vec<GlobalSubarrayId> = match self.live.get(hint) {
                    Some(v) => v.iter().map(|&(sa, _)| sa).collect(),
                    None => {
                        self.violations.push(format!("align: hint {hint:#x} not live"));
                        Vec::new()
                    }
                };
                for (i, d) in draws.iter().enumerate() {
                    match hint_sas.get(i) {
                        Some(&want) => {
                            let available = self.free.get(&want).is_some_and(|s| !s.is_empty());
                            self.aligned_checked += 1;
                            if available {
                                if d.subarray != want || d.path != (DrawPath::Aligned { hint: want }) {
                                    self.violations.push(format!(
                                        "align: position {i} went to {} though {want} had room",
                                        d.subarray
                                    ));
                                }
                                self.take(d, "align");
                            } else {
                                if d.path != (DrawPath::Fallback { hint: want }) {
                                    self.violations
                                        .push(format!("align: position {i} should be a fallback"));
                                }
                                self.check_worst_fit(d, "align fallback");
                            }
                        }
                        None => {
                            if d.path != DrawPath::WorstFit {
                                self.violations
                                    .push(format!("align: surplus position {i} not worst-fit"));
                            }
                            self.check_worst_fit(d, "align surplus");
                        }
                    }
                }
                self.settle(saved, *virtual_base, draws);
            }
            TraceEvent::Free { virtual_base, released } => match self.live.remove(virtual_base) {
                Some(regions) => {
                    if &regions != released {
                        self.violations
                            .push(format!("free {virtual_base:#x}: released set differs"));
                    }
                    for (sa, row) in regions {
                        if !self.free.entry(sa).or_default().insert(row) {
                            self.violations.push(format!("free: {sa} row {row} already free"));
                        }
                    }
                }
                None => self.violations.push(format!("free of unknown {virtual_base:#x}")),
            },
        }
    }

    fn settle(&mut self, saved: BTreeMap<GlobalSubarrayId, BTreeSet<u64>>, va: Option<VirtAddr>, draws: &[Draw]) {
        match va {
            Some(va) => {
                self.live
                    .insert(va, draws.iter().map(|d| (d.subarray, d.row)).collect());
            }
            None => self.free = saved,
        }
    }
}

fn c3_sequence(seed: u64) -> (Vec<String>, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placement = if rng.gen_bool(0.5) {
        Placement::Sequential
    } else {
        Placement::Randomized { seed }
    };
    let mut puma = common::toy_puma(placement);
    puma.set_tracing(true);
    let pages = rng.gen_range(1..=8);
    puma.pim_preallocate(pages).unwrap();
    let row = puma.region_size();
    let mut live: Vec<(VirtAddr, u64)> = Vec::new();
    let mut dead: Vec<VirtAddr> = Vec::new();
    let ops = rng.gen_range(10..80);
    for _ in 0..ops {
        let size = match rng.gen_range(0..4) {
            0 => rng.gen_range(1..=row),
            1 => rng.gen_range(1..=row * 16),
            2 => rng.gen_range(1..=row * 128),
            _ => rng.gen_range(1..=row * 600),
        };
        match rng.gen_range(0..10) {
            0..=2 => {
                if let Ok(a) = puma.pim_alloc(size) {
                    live.push((a.virtual_base, a.length));
                }
            }
            3..=6 if !live.is_empty() => {
                let (hint, hlen) = live[rng.gen_range(0..live.len())];
                let len = if rng.gen_bool(0.7) { hlen } else { size };
                if let Ok(a) = puma.pim_alloc_align(len, hint) {
                    live.push((a.virtual_base, a.length));
                }
            }
            7 if !dead.is_empty() => {
                // stale hints and double frees must be rejected without side effects
                let va = dead[rng.gen_range(0..dead.len())];
                assert!(puma.pim_alloc_align(size, va).is_err());
                assert!(puma.pim_free(va).is_err());
            }
            _ if !live.is_empty() => {
                let (va, _) = live.swap_remove(rng.gen_range(0..live.len()));
                puma.pim_free(va).unwrap();
                dead.push(va);
            }
            _ => {}
        }
    }

    let mut shadow = Shadow {
        free: shadow_inventory(&puma),
        live: HashMap::new(),
        violations: Vec::new(),
        worst_fit_checked: 0,
        aligned_checked: 0,
    };
    for ev in puma.trace() {
        shadow.replay(ev);
    }
    // final state must agree with the allocator's table
    for (sa, rows) in &shadow.free {
        if puma.pool().table().free_count(*sa) != rows.len() {
            shadow.violations.push(format!("final free count differs for {sa}"));
        }
    }
    let v = shadow
        .violations
        .into_iter()
        .map(|s| format!("seed {seed}: {s}"))
        .collect();
    (v, shadow.worst_fit_checked, shadow.aligned_checked)
}

fn c3_worst_fit_alignment() -> Vec<Outcome> {
    let results: Vec<_> = (0..1200u64).into_par_iter().map(c3_sequence).collect();
    let wf: usize = results.iter().map(|r| r.1).sum();
    let al: usize = results.iter().map(|r| r.2).sum();
    let violations: Vec<&String> = results.iter().flat_map(|r| r.0.iter()).collect();
    let pass = violations.is_empty() && wf > 0 && al > 0;
    let detail = if violations.is_empty() {
        format!("1200 sequences, {wf} worst-fit and {al} aligned positions replayed, 0 violations")
    } else {
        format!("{} violations, first: {}", violations.len(), violations[0])
    };
    vec![outcome("C3", "worst-fit and alignment replay", pass, detail)]
}

// ---------------------------------------------------------------- C4

const TRIALS: u64 = 10_000;

fn mean_fraction(setup: &Setup, b: Benchmark, a: AllocatorKind, bits: u64, trials: u64) -> (f64, usize) {
    let ms: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|seed| bench::measure(setup, b, a, bits, seed, false).unwrap())
        .collect();
    let ok: Vec<f64> = ms
        .iter()
        .filter(|m| m.status == RunStatus::Ok)
        .map(|m| m.pim_fraction)
        .collect();
    (ok.iter().sum::<f64>() / ok.len().max(1) as f64, ms.len() - ok.len())
}

fn c4_motivation() -> Vec<Outcome> {
    let setup = default_setup();
    let multi = [Benchmark::Copy, Benchmark::And];
    let mut out = Vec::new();

    // heap allocators
    let bits = 32 * 1024;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for kind in [BaselineKind::MallocSim, BaselineKind::MemalignSim] {
        for b in multi {
            let (f, _) = mean_fraction(&setup, b, AllocatorKind::Baseline(kind), bits, TRIALS);
            worst = worst.max(f);
            parts.push(format!("{kind}/{b}={:.4}%", f * 100.0));
        }
    }
    out.push(outcome(
        "C4a",
        "malloc/memalign operand sets < 1% in DRAM (1e4 seeds, 32 Kib)",
        worst < 0.01,
        parts.join(" "),
    ));

    // huge pages: strictly inside (5%, 95%) for every size >= 32 Kib, rising
    let grid: Vec<u64> = std::iter::once(32 * 1024)
        .chain(
            bench::size_grid(&setup.config.sweep, setup.mapping.region_size())
                .into_iter()
                .filter(|&b| b > 32 * 1024),
        )
        .collect();
    let mut in_band = true;
    let mut rising = true;
    let mut parts = Vec::new();
    for b in multi {
        let series: Vec<f64> = grid
            .iter()
            .map(|&bits| {
                mean_fraction(
                    &setup,
                    b,
                    AllocatorKind::Baseline(BaselineKind::HugepageSim),
                    bits,
                    TRIALS,
                )
                .0
            })
            .collect();
        in_band &= series.iter().all(|&f| f > 0.05 && f < 0.95);
        rising &= series.windows(2).all(|w| w[1] >= w[0]) && series.last() > series.first();
        let s: Vec<String> = series.iter().map(|f| format!("{:.1}", f * 100.0)).collect();
        parts.push(format!("{b}=[{}]%", s.join(",")));
    }
    out.push(outcome(
        "C4b",
        "hugepage operand sets in (5%, 95%) and rising for >= 32 Kib",
        in_band && rising,
        format!(
            "{} over sizes {:?} bits (in band: {in_band}, rising: {rising})",
            parts.join(" "),
            grid
        ),
    ));

    // PUMA with enough pool
    let grid = bench::size_grid(&setup.config.sweep, setup.mapping.region_size());
    let mut random_pool = SimConfig::default();
    random_pool.pool.random_placement = true;
    let random_pool = random_pool.build().unwrap();
    let mut exact = true;
    let mut runs = 0;
    for s in [&setup, &random_pool] {
        for b in Benchmark::ALL {
            for &bits in &grid {
                let ms: Vec<_> = (0..50u64)
                    .into_par_iter()
                    .map(|seed| bench::measure(s, b, AllocatorKind::Puma, bits, seed, false).unwrap())
                    .collect();
                runs += ms.len();
                exact &= ms.iter().all(|m| m.status == RunStatus::Ok && m.pim_fraction == 1.0);
            }
        }
    }
    out.push(outcome(
        "C4c",
        "PUMA operand sets exactly 100% in DRAM",
        exact,
        format!("{runs} runs over zero/copy/and, all grid sizes, sequential and scattered pools"),
    ));
    out
}

// ---------------------------------------------------------------- C5

fn c5_trend() -> Vec<Outcome> {
    let setup = default_setup();
    let records = bench::sweep(&setup).unwrap();
    let mut out = Vec::new();
    for b in [Benchmark::Copy, Benchmark::And] {
        let mut by_size: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in records
            .iter()
            .filter(|r| r.benchmark == b && r.allocator == AllocatorKind::Puma)
        {
            by_size.entry(r.size_bits).or_default().push(r.speedup_vs_malloc);
        }
        let means: Vec<(u64, f64)> = by_size
            .iter()
            .map(|(&s, v)| (s, v.iter().sum::<f64>() / v.len() as f64))
            .collect();
        let above = means.iter().all(|&(_, m)| m > 1.0);
        let mono = means.windows(2).all(|w| w[1].1 >= w[0].1);
        let shown: Vec<String> = means.iter().map(|(s, m)| format!("{s}:{m:.2}")).collect();
        out.push(outcome(
            if b == Benchmark::Copy { "C5-copy" } else { "C5-and" },
            "PUMA speedup over malloc > 1 and non-decreasing",
            above && mono && means.len() == 12,
            format!("{} (>1: {above}, non-decreasing: {mono})", shown.join(" ")),
        ));
    }
    out
}

// ---------------------------------------------------------------- C6

/// Arbitrary scatter of physical pieces, for exercising odd layouts.
struct Pieces {
    length: u64,
    backing: u64,
    pieces: Vec<(PhysAddr, u64)>,
}

impl OperandLayout for Pieces {
    fn length(&self) -> u64 {
        self.length
    }

    fn backing_len(&self) -> u64 {
        self.backing
    }

    fn translate(&self, offset: u64) -> Option<(PhysAddr, u64)> {
        let mut start = 0;
        for &(base, len) in &self.pieces {
            if offset < start + len {
                return Some((base + offset - start, len - (offset - start)));
            }
            start += len;
        }
        None
    }
}

fn random_pieces(rng: &mut ChaCha8Rng, length: u64, row: u64, cap: u64) -> Pieces {
    let backing = if rng.gen_bool(0.5) {
        length
    } else {
        length.next_multiple_of(row)
    };
    let mut pieces = Vec::new();
    let mut covered = 0;
    while covered < backing {
        let left = backing - covered;
        let len = match rng.gen_range(0..3) {
            0 => left,
            1 => (rng.gen_range(1..=4) * row).min(left),
            _ => rng.gen_range(1..=left),
        };
        let base = if rng.gen_bool(0.6) {
            rng.gen_range(0..(cap - len) / row + 1) * row
        } else {
            rng.gen_range(0..=cap - len)
        };
        // sometimes continue the previous piece physically
        let base = match pieces.last() {
            Some(&(b, l)) if rng.gen_bool(0.2) && b + l + len <= cap => b + l,
            _ => base,
        };
        pieces.push((base, len));
        covered += len;
    }
    Pieces {
        length,
        backing,
        pieces,
    }
}

/// Per-byte reference: decode every byte of every operand's row slot.
fn oracle(ops: &[&dyn OperandLayout], count: u64, m: &AddressMapping) -> Vec<Verdict> {
    let row = m.geometry().row_bytes();
    let key = |c: &DramCoordinate| (c.channel, c.rank, c.bank, c.subarray);
    (0..count.div_ceil(row))
        .map(|i| {
            let start = i * row;
            let firsts: Vec<DramCoordinate> = ops
                .iter()
                .map(|o| m.decode(o.translate(start).unwrap().0).unwrap())
                .collect();
            if firsts.iter().any(|c| c.column_byte != 0) {
                return Verdict::Fallback(FallbackReason::RowMisalignment);
            }
            if firsts.iter().any(|c| key(c) != key(&firsts[0])) {
                return Verdict::Fallback(FallbackReason::SubarrayMismatch);
            }
            let whole = ops.iter().zip(&firsts).all(|(o, first)| {
                (0..row).all(|j| {
                    let off = start + j;
                    off < o.backing_len()
                        && o.translate(off).is_some_and(|(pa, _)| {
                            let c = m.decode(pa).unwrap();
                            key(&c) == key(first) && c.row == first.row && c.column_byte == j
                        })
                })
            });
            if whole {
                Verdict::InDram
            } else {
                Verdict::Fallback(FallbackReason::PartialRow)
            }
        })
        .collect()
}

fn c6_trial(seed: u64) -> Result<usize, String> {
    let m = common::toy_mapping();
    let layout = common::toy_layout();
    let row = m.geometry().row_bytes();
    let cap = m.geometry().total_capacity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = [
        PudOpKind::RowInitZero,
        PudOpKind::RowCopy,
        PudOpKind::And,
        PudOpKind::Or,
        PudOpKind::Not,
    ][rng.gen_range(0..5)];
    let count = match rng.gen_range(0..3) {
        0 => rng.gen_range(1..=row),
        1 => rng.gen_range(1..=8) * row,
        _ => rng.gen_range(1..=12 * row),
    };
    let mut puma = common::toy_puma(Placement::Randomized { seed });
    puma.pim_preallocate(8).unwrap();
    let mut baseline: HashMap<BaselineKind, BaselineAllocator> = HashMap::new();
    let mut owned: Vec<Box<dyn OperandLayout>> = Vec::new();
    let mut first_va = None;
    for _ in 0..kind.arity() {
        let pick = rng.gen_range(0..6);
        let boxed: Box<dyn OperandLayout> = match pick {
            0 | 1 => {
                let a = match (pick, first_va) {
                    (1, Some(h)) => puma.pim_alloc_align(count, h).unwrap(),
                    _ => puma.pim_alloc(count).unwrap(),
                };
                first_va.get_or_insert(a.virtual_base);
                Box::new(a)
            }
            2..=4 => {
                let k = [
                    BaselineKind::MallocSim,
                    BaselineKind::MemalignSim,
                    BaselineKind::HugepageSim,
                ][pick - 2];
                let alloc = baseline.entry(k).or_insert_with(|| {
                    BaselineAllocator::with_frame_size(k, &layout, common::TOY_HUGE_PAGE, 4096, seed)
                });
                Box::new(alloc.alloc(count).unwrap())
            }
            _ => Box::new(random_pieces(&mut rng, count, row, cap)),
        };
        owned.push(boxed);
    }
    let ops: Vec<&dyn OperandLayout> = owned.iter().map(|b| b.as_ref()).collect();
    let op = PudOperation::new(kind, ops.clone(), count).unwrap();
    let report = check_executability(&op, &m).unwrap();
    let got: Vec<Verdict> = report.slots.iter().map(|s| s.verdict).collect();
    let want = oracle(&ops, count, &m);
    if got != want {
        return Err(format!("seed {seed}: engine {got:?} vs oracle {want:?}"));
    }
    Ok(report.in_dram_slots())
}

fn c6_oracle() -> Vec<Outcome> {
    let results: Vec<_> = (0..1000u64).into_par_iter().map(c6_trial).collect();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let in_dram: usize = results.iter().filter_map(|r| r.as_ref().ok()).sum();
    let pass = errors.is_empty();
    let detail = if pass {
        format!("1000 operations on the toy system agree ({in_dram} in-DRAM slots)")
    } else {
        format!("{} disagreements, first: {}", errors.len(), errors[0])
    };
    vec![outcome("C6", "executability matches per-byte oracle", pass, detail)]
}

// ---------------------------------------------------------------- C7

fn c7_determinism() -> Vec<Outcome> {
    let setup = default_setup();
    let t0 = Instant::now();
    let a = bench::records_to_csv(&bench::sweep(&setup).unwrap());
    let first = t0.elapsed();
    let b = bench::records_to_csv(&bench::sweep(&default_setup()).unwrap());
    let same = a == b;
    let fast = first < Duration::from_secs(60);
    vec![outcome(
        "C7",
        "sweep is byte-identical across runs and under 60 s",
        same && fast,
        format!(
            "{} lines, identical: {same}, default sweep {:.2} s",
            a.lines().count(),
            first.as_secs_f64()
        ),
    )]
}

fn main() -> ExitCode {
    let criteria: [fn() -> Vec<Outcome>; 7] = [
        c1_address_model,
        c2_region_split,
        c3_worst_fit_alignment,
        c4_motivation,
        c5_trend,
        c6_oracle,
        c7_determinism,
    ];
    let mut failed = 0;
    for c in criteria {
        for o in c() {
            let tag = if o.pass { "PASS" } else { "FAIL" };
            println!("{tag} {:<8} {}: {}", o.id, o.title, o.detail);
            failed += usize::from(!o.pass);
        }
    }
    if failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion line(s) failed");
        ExitCode::FAILURE
    }
}
