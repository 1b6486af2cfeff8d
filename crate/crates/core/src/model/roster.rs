use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{RosterInstance, BLOCKS_PER_DAY};
use crate::error::{Error, Result};

/// Binary assignment tensor `x[e][j][k]`: employee `e` works shift type `k`
/// during block `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Roster {
    employees: usize,
    blocks: usize,
    shift_types: usize,
    cells: Vec<u8>,
}

/// The assignment of one employee on one day: bit `b * s + k` is set when
/// shift type `k` is worked in block `b` of the day. Zero means a rest day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct DayCell(pub u64);

impl DayCell {
    pub const REST: DayCell = DayCell(0);

    pub fn is_rest(self) -> bool {
        self.0 == 0
    }

    pub fn has(self, block_in_day: usize, k: usize, s: usize) -> bool {
        self.0 >> (block_in_day * s + k) & 1 == 1
    }

    pub fn with(self, block_in_day: usize, k: usize, s: usize) -> DayCell {
        DayCell(self.0 | 1 << (block_in_day * s + k))
    }

    /// Number of (block, shift) pairs set.
    pub fn count(self) -> u32 {
        self.0.count_ones()
    }
}

impl Roster {
    pub fn zeros(employees: usize, blocks: usize, shift_types: usize) -> Self {
        Self {
            employees,
            blocks,
            shift_types,
            cells: vec![0; employees * blocks * shift_types],
        }
    }

    pub fn for_instance(inst: &RosterInstance) -> Self {
        let (n, m, s) = inst.dims();
        Self::zeros(n, m, s)
    }

    /// Builds a roster from a flat `(e, j, k)` row-major vector of 0/1 values.
    pub fn from_flat(employees: usize, blocks: usize, shift_types: usize, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != employees * blocks * shift_types {
            return Err(Error::DimensionMismatch {
                expected: (employees, blocks, shift_types),
                found: (cells.len(), 1, 1),
            });
        }
        if cells.iter().any(|&c| c > 1) {
            return Err(Error::InvalidInstance("roster entries must be 0 or 1".into()));
        }
        Ok(Self {
            employees,
            blocks,
            shift_types,
            cells,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.employees, self.blocks, self.shift_types)
    }

    pub fn employees(&self) -> usize {
        self.employees
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn shift_types(&self) -> usize {
        self.shift_types
    }

    pub fn as_flat(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    fn idx(&self, e: usize, j: usize, k: usize) -> usize {
        (e * self.blocks + j) * self.shift_types + k
    }

    #[inline]
    pub fn get(&self, e: usize, j: usize, k: usize) -> bool {
        self.cells[self.idx(e, j, k)] == 1
    }

    #[inline]
    pub fn set(&mut self, e: usize, j: usize, k: usize, on: bool) {
        let i = self.idx(e, j, k);
        self.cells[i] = on as u8;
    }

    /// Number of shift types worked in block `j`.
    #[inline]
    pub fn load(&self, e: usize, j: usize) -> usize {
        let i = self.idx(e, j, 0);
        self.cells[i..i + self.shift_types].iter().filter(|&&c| c == 1).count()
    }

    #[inline]
    pub fn occupied(&self, e: usize, j: usize) -> bool {
        let i = self.idx(e, j, 0);
        self.cells[i..i + self.shift_types].iter().any(|&c| c == 1)
    }

    /// The first shift type worked in block `j`, if any.
    pub fn shift_at(&self, e: usize, j: usize) -> Option<usize> {
        let i = self.idx(e, j, 0);
        self.cells[i..i + self.shift_types].iter().position(|&c| c == 1)
    }

    pub fn days(&self) -> usize {
        self.blocks / BLOCKS_PER_DAY
    }

    pub fn day_cell(&self, e: usize, d: usize) -> DayCell {
        let s = self.shift_types;
        let mut cell = DayCell::REST;
        for b in 0..BLOCKS_PER_DAY {
            for k in 0..s {
                if self.get(e, d * BLOCKS_PER_DAY + b, k) {
                    cell = cell.with(b, k, s);
                }
            }
        }
        cell
    }

    pub fn set_day_cell(&mut self, e: usize, d: usize, cell: DayCell) {
        let s = self.shift_types;
        for b in 0..BLOCKS_PER_DAY {
            for k in 0..s {
                self.set(e, d * BLOCKS_PER_DAY + b, k, cell.has(b, k, s));
            }
        }
    }

    /// Exchanges the full-day assignments of two employees on day `d`.
    pub fn swap_days(&mut self, e1: usize, e2: usize, d: usize) {
        let width = BLOCKS_PER_DAY * self.shift_types;
        let a = self.idx(e1, d * BLOCKS_PER_DAY, 0);
        let b = self.idx(e2, d * BLOCKS_PER_DAY, 0);
        for i in 0..width {
            self.cells.swap(a + i, b + i);
        }
    }

    /// Number of differing `(e, j, k)` entries.
    pub fn hamming(&self, other: &Roster) -> usize {
        self.cells
            .iter()
            .zip(&other.cells)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Blocks `[0, blocks)` of employee `e` worked (any shift type).
    pub fn worked_blocks(&self, e: usize) -> usize {
        (0..self.blocks).filter(|&j| self.occupied(e, j)).count()
    }
}
