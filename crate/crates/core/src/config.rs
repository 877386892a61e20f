//! TOML configuration: `[geometry]`, `[[mapping]]`, `[pool]`, `[cost]`, `[sweep]`.
//!
//! Every section is optional and falls back to the defaults; unknown keys are
//! rejected. When `[[mapping]]` is absent the linear layout for the geometry
//! is used.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dram::{AddressMapping, DramGeometry, MappingEntry};
use crate::engine::CostModel;
use crate::error::ConfigError;
use crate::layout::MemoryLayout;
use crate::pool::{Placement, PoolConfig, DEFAULT_HUGE_PAGE_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoolSettings {
    pub huge_page_size: u64,
    /// Huge pages preallocated for each benchmark run.
    pub pages: usize,
    /// Ceiling on pages the pool may ever hold; defaults to the whole pool zone.
    pub max_pages: Option<usize>,
    /// Scatter preallocated pages over the pool zone, seeded by the run seed.
    pub random_placement: bool,
    /// Frame size of the malloc/memalign models.
    pub frame_size: u64,
}

impl Default for PoolSettings {
    fn default() -> Self {
        PoolSettings {
            huge_page_size: DEFAULT_HUGE_PAGE_SIZE,
            pages: 8,
            max_pages: None,
            random_placement: false,
            frame_size: crate::baseline::FRAME_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    /// Smallest allocation, in bits.
    pub min_bits: u64,
    /// Largest allocation, in bits.
    pub max_bits: u64,
    pub points: usize,
    pub repetitions: u32,
    pub seed: u64,
}

impl Default for SweepSettings {
    /// 2000 bits to 6 Mib (6 * 2^20 bits), 12 points, 3 repetitions.
    fn default() -> Self {
        SweepSettings {
            min_bits: 2000,
            max_bits: 6 << 20,
            points: 12,
            repetitions: 3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub geometry: DramGeometry,
    pub mapping: Option<Vec<MappingEntry>>,
    pub pool: PoolSettings,
    pub cost: CostModel,
    pub sweep: SweepSettings,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// Validates everything and resolves the mapping.
    pub fn build(&self) -> Result<Setup, ConfigError> {
        let entries = match &self.mapping {
            Some(m) => m.clone(),
            None => AddressMapping::linear_entries(&self.geometry),
        };
        let mapping = AddressMapping::new(self.geometry, entries)?;
        self.cost.validate()?;
        let p = &self.pool;
        if p.pages == 0 {
            return Err(ConfigError::Pool("pool.pages must be at least 1".into()));
        }
        if !p.frame_size.is_power_of_two() || p.frame_size < 16 {
            return Err(ConfigError::Pool(format!(
                "frame size {} must be a power of two >= 16",
                p.frame_size
            )));
        }
        let layout = MemoryLayout::for_geometry(&self.geometry);
        if !p.huge_page_size.is_power_of_two() || p.huge_page_size > layout.huge_pages.len {
            return Err(ConfigError::Pool(format!(
                "huge page size {} must be a power of two no larger than a quarter of memory",
                p.huge_page_size
            )));
        }
        let s = &self.sweep;
        if s.min_bits == 0 || s.max_bits < s.min_bits {
            return Err(ConfigError::Sweep(format!(
                "bad size range {}..={}",
                s.min_bits, s.max_bits
            )));
        }
        if s.points == 0 || (s.points == 1 && s.min_bits != s.max_bits) {
            return Err(ConfigError::Sweep(
                "points must be >= 2 unless min_bits == max_bits".into(),
            ));
        }
        if s.repetitions == 0 {
            return Err(ConfigError::Sweep("repetitions must be >= 1".into()));
        }
        Ok(Setup {
            config: self.clone(),
            mapping,
            layout,
        })
    }
}

/// A validated configuration, ready to build allocators from.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: SimConfig,
    pub mapping: AddressMapping,
    pub layout: MemoryLayout,
}

impl Setup {
    pub fn pool_config(&self, seed: u64) -> PoolConfig {
        let p = &self.config.pool;
        PoolConfig {
            huge_page_size: p.huge_page_size,
            max_pages: p.max_pages,
            placement: if p.random_placement {
                Placement::Randomized { seed }
            } else {
                Placement::Sequential
            },
        }
    }
}
