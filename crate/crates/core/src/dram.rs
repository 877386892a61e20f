//! DRAM geometry and physical-address interleaving.
//!
//! An [`AddressMapping`] assigns every physical-address bit to one DRAM
//! coordinate field. Fields may be scattered over several bit ranges; a
//! scattered field is assembled with its highest-positioned range supplying
//! the most significant bits of the field value.
//!
//! Accepted mappings keep every DRAM row physically contiguous: all bits
//! below `log2(row bytes)` must be column bits. The allocators rely on that
//! to carve huge pages into row-sized regions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AddressError, ConfigError};

pub type PhysAddr = u64;

/// Coordinate fields of a DRAM address, listed from least to most significant
/// in the default linear layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Column,
    Row,
    Subarray,
    Bank,
    Rank,
    Channel,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Column,
        Field::Row,
        Field::Subarray,
        Field::Bank,
        Field::Rank,
        Field::Channel,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Field::Column => "column",
            Field::Row => "row",
            Field::Subarray => "subarray",
            Field::Bank => "bank",
            Field::Rank => "rank",
            Field::Channel => "channel",
        };
        f.write_str(name)
    }
}

/// Shape of the simulated memory. Every count is a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DramGeometry {
    pub channels: u64,
    pub ranks_per_channel: u64,
    pub banks_per_rank: u64,
    pub subarrays_per_bank: u64,
    pub rows_per_subarray: u64,
    pub columns_per_row: u64,
    pub bytes_per_column: u64,
}

impl Default for DramGeometry {
    /// 8 GiB: one channel, one rank, 8 banks of 1024 subarrays, each
    /// subarray 1024 rows of 1024 one-byte columns (1 MiB).
    fn default() -> Self {
        DramGeometry {
            channels: 1,
            ranks_per_channel: 1,
            banks_per_rank: 8,
            subarrays_per_bank: 1024,
            rows_per_subarray: 1024,
            columns_per_row: 1024,
            bytes_per_column: 1,
        }
    }
}

impl DramGeometry {
    fn named_fields(&self) -> [(&'static str, u64); 7] {
        [
            ("channels", self.channels),
            ("ranks_per_channel", self.ranks_per_channel),
            ("banks_per_rank", self.banks_per_rank),
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_subarray", self.rows_per_subarray),
            ("columns_per_row", self.columns_per_row),
            ("bytes_per_column", self.bytes_per_column),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in self.named_fields() {
            if !value.is_power_of_two() {
                return Err(ConfigError::NotPowerOfTwo { field, value });
            }
        }
        if self.address_bits() > 63 {
            return Err(ConfigError::NotPowerOfTwo {
                field: "total_capacity",
                value: u64::MAX,
            });
        }
        Ok(())
    }

    pub fn total_capacity(&self) -> u64 {
        self.named_fields().iter().map(|(_, v)| v).product()
    }

    pub fn address_bits(&self) -> u32 {
        self.named_fields().iter().map(|(_, v)| v.trailing_zeros()).sum()
    }

    /// Bytes in one DRAM row, which is also the allocation region size.
    pub fn row_bytes(&self) -> u64 {
        self.columns_per_row * self.bytes_per_column
    }

    pub fn subarray_bytes(&self) -> u64 {
        self.row_bytes() * self.rows_per_subarray
    }

    /// Number of distinct (channel, rank, bank, subarray) tuples.
    pub fn subarray_count(&self) -> u64 {
        self.channels * self.ranks_per_channel * self.banks_per_rank * self.subarrays_per_bank
    }

    /// Number of distinct values of `field`.
    pub fn field_count(&self, field: Field) -> u64 {
        match field {
            Field::Column => self.row_bytes(),
            Field::Row => self.rows_per_subarray,
            Field::Subarray => self.subarrays_per_bank,
            Field::Bank => self.banks_per_rank,
            Field::Rank => self.ranks_per_channel,
            Field::Channel => self.channels,
        }
    }

    pub fn field_width(&self, field: Field) -> u32 {
        self.field_count(field).trailing_zeros()
    }
}

/// Inclusive range of physical-address bit positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitRange {
    pub lo: u32,
    pub hi: u32,
}

impl BitRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        BitRange { lo, hi }
    }

    pub fn width(&self) -> u32 {
        self.hi - self.lo + 1
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width()) - 1
    }
}

/// One line of a mapping description: `field` occupies bits `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    pub field: Field,
    /// `[lo, hi]`, inclusive.
    pub bits: [u32; 2],
}

impl MappingEntry {
    pub fn new(field: Field, lo: u32, hi: u32) -> Self {
        MappingEntry { field, bits: [lo, hi] }
    }

    fn range(&self) -> BitRange {
        BitRange::new(self.bits[0], self.bits[1])
    }
}

/// Checks a mapping against a geometry.
///
/// Diagnostics are reported in this order: geometry, inverted range,
/// overlap, coverage, width, row-region contiguity.
pub fn validate_mapping(geometry: &DramGeometry, entries: &[MappingEntry]) -> Result<(), ConfigError> {
    geometry.validate()?;
    let width = geometry.address_bits();

    for e in entries {
        if e.bits[0] > e.bits[1] {
            return Err(ConfigError::InvertedRange {
                field: e.field,
                lo: e.bits[0],
                hi: e.bits[1],
            });
        }
    }

    // bit position -> owning field; positions past the address width still count as overlap
    // candidates but are reported as width mismatches below.
    let max_bit = entries.iter().map(|e| e.bits[1]).max().unwrap_or(0).max(width);
    let mut owner: Vec<Option<Field>> = vec![None; max_bit as usize + 1];
    for e in entries {
        for bit in e.bits[0]..=e.bits[1] {
            if let Some(first) = owner[bit as usize] {
                return Err(ConfigError::OverlappingBits {
                    bit,
                    first,
                    second: e.field,
                });
            }
            owner[bit as usize] = Some(e.field);
        }
    }

    let uncovered: Vec<u32> = (0..width).filter(|&b| owner[b as usize].is_none()).collect();
    if !uncovered.is_empty() {
        return Err(ConfigError::UncoveredBits { bits: uncovered, width });
    }

    for field in Field::ALL {
        let actual: u32 = entries
            .iter()
            .filter(|e| e.field == field)
            .map(|e| e.range().width())
            .sum();
        let expected = geometry.field_width(field);
        if actual != expected {
            return Err(ConfigError::WidthMismatch {
                field,
                expected,
                actual,
            });
        }
    }

    let boundary = geometry.row_bytes().trailing_zeros();
    for bit in 0..boundary {
        let field = owner[bit as usize].expect("coverage checked");
        if field != Field::Column {
            return Err(ConfigError::NonContiguousRegion { bit, field, boundary });
        }
    }
    Ok(())
}

/// Decoded position of a byte inside the DRAM hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DramCoordinate {
    pub channel: u64,
    pub rank: u64,
    pub bank: u64,
    pub subarray: u64,
    pub row: u64,
    pub column_byte: u64,
}

impl DramCoordinate {
    pub fn get(&self, field: Field) -> u64 {
        match field {
            Field::Column => self.column_byte,
            Field::Row => self.row,
            Field::Subarray => self.subarray,
            Field::Bank => self.bank,
            Field::Rank => self.rank,
            Field::Channel => self.channel,
        }
    }

    fn set(&mut self, field: Field, value: u64) {
        match field {
            Field::Column => self.column_byte = value,
            Field::Row => self.row = value,
            Field::Subarray => self.subarray = value,
            Field::Bank => self.bank = value,
            Field::Rank => self.rank = value,
            Field::Channel => self.channel = value,
        }
    }
}

impl fmt::Display for DramCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ch {} rk {} bk {} sa {} row {} col {}",
            self.channel, self.rank, self.bank, self.subarray, self.row, self.column_byte
        )
    }
}

/// Unique index of a (channel, rank, bank, subarray) tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalSubarrayId(pub u32);

impl fmt::Display for GlobalSubarrayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// A validated interleaving scheme bound to its geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressMapping {
    geometry: DramGeometry,
    entries: Vec<MappingEntry>,
    // per field, ranges sorted from most to least significant position
    ranges: [Vec<BitRange>; 6],
}

impl AddressMapping {
    pub fn new(geometry: DramGeometry, entries: Vec<MappingEntry>) -> Result<Self, ConfigError> {
        validate_mapping(&geometry, &entries)?;
        let mut ranges: [Vec<BitRange>; 6] = Default::default();
        for e in &entries {
            ranges[e.field.index()].push(e.range());
        }
        for r in ranges.iter_mut() {
            r.sort_by_key(|b| std::cmp::Reverse(b.lo));
        }
        Ok(AddressMapping {
            geometry,
            entries,
            ranges,
        })
    }

    /// Column, row, subarray, bank, rank and channel packed upwards from bit 0.
    /// Fields of width zero are omitted.
    pub fn linear_entries(geometry: &DramGeometry) -> Vec<MappingEntry> {
        let mut entries = Vec::new();
        let mut lo = 0;
        for field in Field::ALL {
            let w = geometry.field_width(field);
            if w > 0 {
                entries.push(MappingEntry::new(field, lo, lo + w - 1));
                lo += w;
            }
        }
        entries
    }

    pub fn linear(geometry: DramGeometry) -> Result<Self, ConfigError> {
        Self::new(geometry, Self::linear_entries(&geometry))
    }

    pub fn geometry(&self) -> &DramGeometry {
        &self.geometry
    }

    pub fn entries(&self) -> &[MappingEntry] {
        &self.entries
    }

    pub fn region_size(&self) -> u64 {
        self.geometry.row_bytes()
    }

    fn check_addr(&self, addr: PhysAddr) -> Result<(), AddressError> {
        let capacity = self.geometry.total_capacity();
        if addr >= capacity {
            return Err(AddressError::OutOfRange { addr, capacity });
        }
        Ok(())
    }

    fn extract(&self, field: Field, addr: PhysAddr) -> u64 {
        self.ranges[field.index()]
            .iter()
            .fold(0, |acc, r| (acc << r.width()) | ((addr >> r.lo) & r.mask()))
    }

    pub fn decode(&self, addr: PhysAddr) -> Result<DramCoordinate, AddressError> {
        self.check_addr(addr)?;
        let mut coord = DramCoordinate::default();
        for field in Field::ALL {
            coord.set(field, self.extract(field, addr));
        }
        Ok(coord)
    }

    pub fn encode(&self, coord: &DramCoordinate) -> Result<PhysAddr, AddressError> {
        let mut addr = 0;
        for field in Field::ALL {
            let limit = self.geometry.field_count(field);
            let mut value = coord.get(field);
            if value >= limit {
                return Err(AddressError::CoordinateOutOfBounds { field, value, limit });
            }
            for r in self.ranges[field.index()].iter().rev() {
                addr |= (value & r.mask()) << r.lo;
                value >>= r.width();
            }
        }
        Ok(addr)
    }

    /// Concatenates channel, rank, bank and subarray (in that order, most
    /// significant first) into one index.
    pub fn subarray_id_of(&self, coord: &DramCoordinate) -> GlobalSubarrayId {
        let g = &self.geometry;
        let id = ((coord.channel * g.ranks_per_channel + coord.rank) * g.banks_per_rank + coord.bank)
            * g.subarrays_per_bank
            + coord.subarray;
        GlobalSubarrayId(id as u32)
    }

    pub fn global_subarray_id(&self, addr: PhysAddr) -> Result<GlobalSubarrayId, AddressError> {
        Ok(self.subarray_id_of(&self.decode(addr)?))
    }

    /// Inverse of [`AddressMapping::subarray_id_of`].
    pub fn subarray_coordinate(&self, id: GlobalSubarrayId) -> DramCoordinate {
        let g = &self.geometry;
        let mut rest = id.0 as u64;
        let subarray = rest % g.subarrays_per_bank;
        rest /= g.subarrays_per_bank;
        let bank = rest % g.banks_per_rank;
        rest /= g.banks_per_rank;
        let rank = rest % g.ranks_per_channel;
        rest /= g.ranks_per_channel;
        DramCoordinate {
            channel: rest,
            rank,
            bank,
            subarray,
            row: 0,
            column_byte: 0,
        }
    }
}
