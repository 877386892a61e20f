//! Row-granular executability check and latency model for in-DRAM operations.
//!
//! An operation is split into row slots of `region_size` bytes. Slot `i` runs
//! in DRAM only if, for every operand,
//!
//! 1. the slot starts on a row boundary,
//! 2. all operands' slots sit in the same subarray, and
//! 3. the whole row belongs to the operand: it is physically contiguous and
//!    inside the operand's owned backing.
//!
//! Condition 3 lets a partial tail slot run in DRAM when the operand owns the
//! rest of the row (PUMA regions, huge pages) but not when the row is shared
//! with neighbouring heap data. The first failing condition is reported.

use std::fmt;

use crate::baseline::BaselineAllocation;
use crate::dram::{AddressMapping, PhysAddr};
use crate::error::{ConfigError, EngineError};
use crate::puma::Allocation;

/// Physical view of an operand, independent of which allocator produced it.
pub trait OperandLayout {
    /// Requested length in bytes.
    fn length(&self) -> u64;

    /// Bytes owned outright from the start of the allocation.
    fn backing_len(&self) -> u64;

    /// Physical address of byte `offset` and the contiguous run from it.
    fn translate(&self, offset: u64) -> Option<(PhysAddr, u64)>;
}

impl OperandLayout for Allocation {
    fn length(&self) -> u64 {
        self.length
    }

    fn backing_len(&self) -> u64 {
        self.backing_size()
    }

    fn translate(&self, offset: u64) -> Option<(PhysAddr, u64)> {
        let size = self.regions.first()?.size;
        let r = self.regions.get((offset / size) as usize)?;
        let within = offset % size;
        Some((r.physical_base + within, size - within))
    }
}

impl OperandLayout for BaselineAllocation {
    fn length(&self) -> u64 {
        self.length
    }

    fn backing_len(&self) -> u64 {
        self.backing_len
    }

    fn translate(&self, offset: u64) -> Option<(PhysAddr, u64)> {
        BaselineAllocation::translate(self, offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PudOpKind {
    RowInitZero,
    RowCopy,
    And,
    Or,
    Not,
}

impl PudOpKind {
    pub fn arity(self) -> usize {
        match self {
            PudOpKind::RowInitZero => 1,
            PudOpKind::RowCopy | PudOpKind::Not => 2,
            PudOpKind::And | PudOpKind::Or => 3,
        }
    }

    /// Boolean ops go through triple-row activation; zero/copy are RowClone.
    pub fn is_boolean(self) -> bool {
        matches!(self, PudOpKind::And | PudOpKind::Or | PudOpKind::Not)
    }
}

impl fmt::Display for PudOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PudOpKind::RowInitZero => "zero",
            PudOpKind::RowCopy => "copy",
            PudOpKind::And => "and",
            PudOpKind::Or => "or",
            PudOpKind::Not => "not",
        };
        f.write_str(s)
    }
}

/// An operation over operand layouts. Operand order: sources first,
/// destination last (`zero` has only the destination).
pub struct PudOperation<'a> {
    pub kind: PudOpKind,
    pub operands: Vec<&'a dyn OperandLayout>,
    pub element_count: u64,
}

impl<'a> PudOperation<'a> {
    pub fn new(kind: PudOpKind, operands: Vec<&'a dyn OperandLayout>, element_count: u64) -> Result<Self, EngineError> {
        if operands.len() != kind.arity() {
            return Err(EngineError::Arity {
                kind,
                expected: kind.arity(),
                actual: operands.len(),
            });
        }
        if element_count == 0 {
            return Err(EngineError::Empty);
        }
        for (i, op) in operands.iter().enumerate() {
            if element_count > op.length() {
                return Err(EngineError::ElementCount {
                    count: element_count,
                    operand: i,
                    length: op.length(),
                });
            }
        }
        Ok(PudOperation {
            kind,
            operands,
            element_count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FallbackReason {
    RowMisalignment,
    SubarrayMismatch,
    PartialRow,
}

impl fmt::Display for FallbackReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FallbackReason::RowMisalignment => "row misalignment",
            FallbackReason::SubarrayMismatch => "subarray mismatch",
            FallbackReason::PartialRow => "partial row",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    InDram,
    Fallback(FallbackReason),
}

impl Verdict {
    pub fn is_in_dram(&self) -> bool {
        matches!(self, Verdict::InDram)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotVerdict {
    pub slot: usize,
    /// Operand bytes covered by this slot (less than a row only for the tail).
    pub bytes: u64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutabilityReport {
    pub kind: PudOpKind,
    pub slots: Vec<SlotVerdict>,
}

impl ExecutabilityReport {
    pub fn in_dram_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.verdict.is_in_dram()).count()
    }

    pub fn pim_fraction(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.in_dram_slots() as f64 / self.slots.len() as f64
    }

    /// `slot,verdict,reason` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,verdict,reason\n");
        for s in &self.slots {
            match s.verdict {
                Verdict::InDram => out.push_str(&format!("{},in-dram,\n", s.slot)),
                Verdict::Fallback(r) => out.push_str(&format!("{},fallback,{}\n", s.slot, r)),
            }
        }
        out
    }
}

/// Extends `run` across pieces of the operand that continue physically at
/// `pa + run`, stopping once `want` bytes are covered.
fn contiguous_run(operand: &dyn OperandLayout, offset: u64, pa: PhysAddr, mut run: u64, want: u64) -> u64 {
    while run < want {
        match operand.translate(offset + run) {
            Some((next, more)) if next == pa + run && more > 0 => run += more,
            _ => break,
        }
    }
    run
}

pub fn check_executability(
    op: &PudOperation<'_>,
    mapping: &AddressMapping,
) -> Result<ExecutabilityReport, EngineError> {
    let row = mapping.region_size();
    let n_slots = op.element_count.div_ceil(row) as usize;
    let mut slots = Vec::with_capacity(n_slots);
    let mut spans = Vec::with_capacity(op.operands.len());
    for i in 0..n_slots {
        let offset = i as u64 * row;
        spans.clear();
        for (k, operand) in op.operands.iter().enumerate() {
            let span = operand
                .translate(offset)
                .ok_or(EngineError::Unresolvable { operand: k, offset })?;
            spans.push(span);
        }

        let misaligned = spans.iter().any(|(pa, _)| pa % row != 0);
        let verdict = if misaligned {
            Verdict::Fallback(FallbackReason::RowMisalignment)
        } else {
            let first = mapping.global_subarray_id(spans[0].0)?;
            let mut same = true;
            for (pa, _) in &spans[1..] {
                same &= mapping.global_subarray_id(*pa)? == first;
            }
            let owned = op.operands.iter().zip(&spans).all(|(operand, &(pa, run))| {
                operand.backing_len() >= offset + row && contiguous_run(*operand, offset, pa, run, row) >= row
            });
            if !same {
                Verdict::Fallback(FallbackReason::SubarrayMismatch)
            } else if !owned {
                Verdict::Fallback(FallbackReason::PartialRow)
            } else {
                Verdict::InDram
            }
        };
        slots.push(SlotVerdict {
            slot: i,
            bytes: row.min(op.element_count - offset),
            verdict,
        });
    }
    Ok(ExecutabilityReport { kind: op.kind, slots })
}

/// Latency parameters, in arbitrary time units (nanoseconds in the shipped config).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    /// One RowClone row copy or initialisation.
    pub t_dram_row_op: f64,
    /// One Boolean row, including operand staging and triple-row activation.
    pub t_ambit_row_op: f64,
    /// CPU fallback per byte, memory transfer included.
    pub t_cpu_per_byte: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            t_dram_row_op: 90.0,
            t_ambit_row_op: 200.0,
            t_cpu_per_byte: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("t_dram_row_op", self.t_dram_row_op),
            ("t_ambit_row_op", self.t_ambit_row_op),
            ("t_cpu_per_byte", self.t_cpu_per_byte),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::Cost { name, value });
            }
        }
        Ok(())
    }
}

/// Modelled latency of running `report`'s slots: in-DRAM slots cost one row
/// operation, fallback slots cost their bytes at CPU speed.
pub fn execute(report: &ExecutabilityReport, cost: &CostModel) -> f64 {
    let row_op = if report.kind.is_boolean() {
        cost.t_ambit_row_op
    } else {
        cost.t_dram_row_op
    };
    report
        .slots
        .iter()
        .map(|s| match s.verdict {
            Verdict::InDram => row_op,
            Verdict::Fallback(_) => s.bytes as f64 * cost.t_cpu_per_byte,
        })
        .sum()
}
