//! Boot-time huge-page pool split into row-sized memory regions.
//!
//! Each region is one DRAM row, tagged with the global subarray it lives in.
//! Free regions are tracked per subarray; the allocator asks for the subarray
//! with the most free regions, or for a region in one specific subarray.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dram::{AddressMapping, GlobalSubarrayId, PhysAddr};
use crate::error::{AllocError, ConfigError};
use crate::layout::Zone;

pub const DEFAULT_HUGE_PAGE_SIZE: u64 = 2 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HugePage {
    pub index: usize,
    pub physical_base: PhysAddr,
    pub size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId(pub u32);

/// One DRAM row carved out of a huge page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryRegion {
    pub id: RegionId,
    pub physical_base: PhysAddr,
    pub size: u64,
    pub subarray: GlobalSubarrayId,
    pub row: u64,
    /// Index of the owning huge page in the pool.
    pub page: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionState {
    Free,
    Allocated,
}

/// Splits `page` into row-sized regions, numbering them from `first_id`.
///
/// The page must be aligned to its size and the mapping must be validated;
/// the pool guarantees both.
pub fn split_huge_page(page: &HugePage, mapping: &AddressMapping, first_id: u32) -> Vec<MemoryRegion> {
    let region_size = mapping.region_size();
    (0..page.size / region_size)
        .map(|k| {
            let base = page.physical_base + k * region_size;
            let coord = mapping.decode(base).expect("pool pages lie inside the address space");
            MemoryRegion {
                id: RegionId(first_id + k as u32),
                physical_base: base,
                size: region_size,
                subarray: mapping.subarray_id_of(&coord),
                row: coord.row,
                page: page.index,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct FreeList {
    free: BTreeMap<u64, RegionId>,
    total: usize,
}

/// Per-subarray free-region accounting, ordered by subarray ID.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubarrayFreeTable {
    lists: BTreeMap<GlobalSubarrayId, FreeList>,
}

impl SubarrayFreeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a new free region.
    pub fn insert(&mut self, region: &MemoryRegion) {
        let list = self.lists.entry(region.subarray).or_default();
        list.free.insert(region.row, region.id);
        list.total += 1;
    }

    pub fn free_count(&self, subarray: GlobalSubarrayId) -> usize {
        self.lists.get(&subarray).map_or(0, |l| l.free.len())
    }

    pub fn total_count(&self, subarray: GlobalSubarrayId) -> usize {
        self.lists.get(&subarray).map_or(0, |l| l.total)
    }

    pub fn total_free(&self) -> usize {
        self.lists.values().map(|l| l.free.len()).sum()
    }

    pub fn total_regions(&self) -> usize {
        self.lists.values().map(|l| l.total).sum()
    }

    /// `(subarray, free_count)` for every subarray in the pool, by ascending ID.
    pub fn counts(&self) -> impl Iterator<Item = (GlobalSubarrayId, usize)> + '_ {
        self.lists.iter().map(|(id, l)| (*id, l.free.len()))
    }

    /// Free rows of one subarray, ascending.
    pub fn free_rows(&self, subarray: GlobalSubarrayId) -> Vec<u64> {
        self.lists
            .get(&subarray)
            .map(|l| l.free.keys().copied().collect())
            .unwrap_or_default()
    }

    /// Subarray with the most free regions; ties go to the lowest ID.
    pub fn max_free_subarray(&self) -> Option<GlobalSubarrayId> {
        let mut best: Option<(GlobalSubarrayId, usize)> = None;
        for (id, list) in &self.lists {
            let n = list.free.len();
            if n > 0 && best.is_none_or(|(_, b)| n > b) {
                best = Some((*id, n));
            }
        }
        best.map(|(id, _)| id)
    }

    fn take_lowest(&mut self, subarray: GlobalSubarrayId) -> Option<RegionId> {
        self.lists.get_mut(&subarray)?.free.pop_first().map(|(_, id)| id)
    }

    fn put_back(&mut self, region: &MemoryRegion) {
        self.lists
            .get_mut(&region.subarray)
            .expect("released region belongs to a pooled subarray")
            .free
            .insert(region.row, region.id);
    }
}

/// Where preallocated huge pages land inside the pool zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Consecutive pages from the start of the zone.
    Sequential,
    /// Seeded random page slots, modelling a fragmented boot state.
    Randomized { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub huge_page_size: u64,
    /// Upper bound on pages ever reserved; `None` means the whole zone.
    pub max_pages: Option<usize>,
    pub placement: Placement,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            huge_page_size: DEFAULT_HUGE_PAGE_SIZE,
            max_pages: None,
            placement: Placement::Sequential,
        }
    }
}

/// Summary returned by [`PhysicalPool::preallocate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolReport {
    pub pages_added: usize,
    pub regions_created: usize,
    /// Regions created by this call, per subarray, by ascending ID.
    pub per_subarray: Vec<(GlobalSubarrayId, usize)>,
}

impl PoolReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subarray,regions\n");
        for (id, n) in &self.per_subarray {
            out.push_str(&format!("{},{}\n", id.0, n));
        }
        out
    }
}

impl fmt::Display for PoolReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} huge pages, {} regions across {} subarrays",
            self.pages_added,
            self.regions_created,
            self.per_subarray.len()
        )?;
        for (id, n) in &self.per_subarray {
            writeln!(f, "  {id}: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PhysicalPool {
    mapping: AddressMapping,
    config: PoolConfig,
    zone: Zone,
    rng: Option<ChaCha8Rng>,
    used_slots: HashSet<u64>,
    pages: Vec<HugePage>,
    regions: Vec<MemoryRegion>,
    states: Vec<RegionState>,
    table: SubarrayFreeTable,
}

impl PhysicalPool {
    pub fn new(mapping: AddressMapping, zone: Zone, config: PoolConfig) -> Result<Self, ConfigError> {
        let hp = config.huge_page_size;
        if !hp.is_power_of_two() || hp < mapping.region_size() {
            return Err(ConfigError::Pool(format!(
                "huge page size {hp} must be a power of two of at least one row ({} bytes)",
                mapping.region_size()
            )));
        }
        if !zone.base.is_multiple_of(hp) || zone.len < hp {
            return Err(ConfigError::Pool(format!(
                "pool zone {:#x}+{:#x} cannot hold {hp}-byte aligned huge pages",
                zone.base, zone.len
            )));
        }
        let rng = match config.placement {
            Placement::Sequential => None,
            Placement::Randomized { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Ok(PhysicalPool {
            mapping,
            config,
            zone,
            rng,
            used_slots: HashSet::new(),
            pages: Vec::new(),
            regions: Vec::new(),
            states: Vec::new(),
            table: SubarrayFreeTable::new(),
        })
    }

    pub fn mapping(&self) -> &AddressMapping {
        &self.mapping
    }

    pub fn table(&self) -> &SubarrayFreeTable {
        &self.table
    }

    pub fn pages(&self) -> &[HugePage] {
        &self.pages
    }

    pub fn regions(&self) -> &[MemoryRegion] {
        &self.regions
    }

    pub fn region(&self, id: RegionId) -> &MemoryRegion {
        &self.regions[id.0 as usize]
    }

    pub fn state(&self, id: RegionId) -> RegionState {
        self.states[id.0 as usize]
    }

    pub fn region_size(&self) -> u64 {
        self.mapping.region_size()
    }

    pub fn capacity_pages(&self) -> usize {
        let zone_pages = (self.zone.len / self.config.huge_page_size) as usize;
        self.config.max_pages.map_or(zone_pages, |m| m.min(zone_pages))
    }

    pub fn allocated_count(&self) -> usize {
        self.states.iter().filter(|s| **s == RegionState::Allocated).count()
    }

    /// Reserves `n_pages` huge pages and splits them into free regions.
    pub fn preallocate(&mut self, n_pages: usize) -> Result<PoolReport, AllocError> {
        if n_pages == 0 {
            return Err(AllocError::ZeroPages);
        }
        let available = self.capacity_pages() - self.pages.len();
        if n_pages > available {
            return Err(AllocError::InsufficientMemory {
                requested: n_pages,
                available,
            });
        }
        let zone_pages = self.zone.len / self.config.huge_page_size;
        let mut per_subarray: BTreeMap<GlobalSubarrayId, usize> = BTreeMap::new();
        let mut created = 0;
        for _ in 0..n_pages {
            let slot = match self.rng.as_mut() {
                None => (0..zone_pages)
                    .find(|s| !self.used_slots.contains(s))
                    .expect("capacity checked"),
                Some(rng) => loop {
                    let s = rng.gen_range(0..zone_pages);
                    if !self.used_slots.contains(&s) {
                        break s;
                    }
                },
            };
            self.used_slots.insert(slot);
            let page = HugePage {
                index: self.pages.len(),
                physical_base: self.zone.base + slot * self.config.huge_page_size,
                size: self.config.huge_page_size,
            };
            let regions = split_huge_page(&page, &self.mapping, self.regions.len() as u32);
            for r in &regions {
                self.table.insert(r);
                *per_subarray.entry(r.subarray).or_default() += 1;
            }
            created += regions.len();
            self.states
                .extend(std::iter::repeat_n(RegionState::Free, regions.len()));
            self.regions.extend(regions);
            self.pages.push(page);
        }
        Ok(PoolReport {
            pages_added: n_pages,
            regions_created: created,
            per_subarray: per_subarray.into_iter().collect(),
        })
    }

    pub fn max_free_subarray(&self) -> Option<GlobalSubarrayId> {
        self.table.max_free_subarray()
    }

    /// Takes the lowest-row free region of `subarray`, if any.
    pub fn take_region(&mut self, subarray: GlobalSubarrayId) -> Option<MemoryRegion> {
        let id = self.table.take_lowest(subarray)?;
        self.states[id.0 as usize] = RegionState::Allocated;
        Some(self.regions[id.0 as usize])
    }

    pub fn release_region(&mut self, region: &MemoryRegion) -> Result<(), AllocError> {
        let idx = region.id.0 as usize;
        match self.states.get(idx) {
            Some(RegionState::Allocated) if self.regions[idx] == *region => {}
            _ => return Err(AllocError::DoubleRelease(region.physical_base)),
        }
        self.states[idx] = RegionState::Free;
        self.table.put_back(region);
        Ok(())
    }
}
