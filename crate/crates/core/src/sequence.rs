//! Random access to one-sided symbol sequences.

use alloc::vec::Vec;

use crate::blocks::BlockSchedule;
use crate::error::{Error, Result};
use crate::symbol::{Psi, RotationVector, Symbol};

/// A one-sided sequence `ω(1), ω(2), …` over `{0, 1, 2}`.
///
/// Implementors may be materialized prefixes or pointwise evaluators over an
/// unbounded index range.
pub trait SymbolicSequence {
    /// The block schedule the sequence was built on, if any.
    fn schedule(&self) -> Option<&BlockSchedule>;

    /// Last evaluable index, or `None` when every index is evaluable.
    fn horizon(&self) -> Option<u64>;

    fn symbol(&self, j: u64) -> Result<Symbol>;

    /// `psi` of the window `[lo, hi]`.
    fn psi_range(&self, lo: u64, hi: u64) -> Result<Psi> {
        let mut p = Psi::ZERO;
        if lo == 0 {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        for j in lo..=hi {
            p.push(self.symbol(j)?);
        }
        Ok(p)
    }

    /// `rho([lo, hi]) = psi([lo, hi]) / (hi - lo + 1)`.
    fn rho(&self, lo: u64, hi: u64) -> Result<RotationVector> {
        if hi < lo {
            return Err(Error::InvalidParams("empty window".into()));
        }
        RotationVector::new(self.psi_range(lo, hi)?, hi - lo + 1)
    }

    fn check_range(&self, lo: u64, hi: u64) -> Result<()> {
        if lo == 0 {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        match self.horizon() {
            Some(h) if hi > h => Err(Error::OutOfHorizon { index: hi, horizon: h }),
            _ => Ok(()),
        }
    }
}

const CHECKPOINT: usize = 256;

/// A materialized prefix `ω(1..=horizon)` with checkpointed prefix sums.
#[derive(Debug, Clone)]
pub struct Materialized {
    schedule: Option<BlockSchedule>,
    symbols: Vec<Symbol>,
    checkpoints: Vec<Psi>,
}

impl Materialized {
    pub fn new(schedule: Option<BlockSchedule>, symbols: Vec<Symbol>) -> Self {
        let mut checkpoints = Vec::with_capacity(symbols.len() / CHECKPOINT + 1);
        let mut p = Psi::ZERO;
        for (i, &s) in symbols.iter().enumerate() {
            if i % CHECKPOINT == 0 {
                checkpoints.push(p);
            }
            p.push(s);
        }
        if symbols.len().is_multiple_of(CHECKPOINT) {
            checkpoints.push(p);
        }
        Materialized {
            schedule,
            symbols,
            checkpoints,
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> u64 {
        self.symbols.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// A copy with the symbol at `j` replaced.
    pub fn with_symbol(&self, j: u64, s: Symbol) -> Result<Self> {
        self.check_range(j, j)?;
        let mut symbols = self.symbols.clone();
        symbols[j as usize - 1] = s;
        Ok(Materialized::new(self.schedule.clone(), symbols))
    }

    /// `psi([1, x])`.
    pub fn prefix(&self, x: u64) -> Psi {
        let x = x as usize;
        let c = x / CHECKPOINT;
        let mut p = self.checkpoints[c];
        for &s in &self.symbols[c * CHECKPOINT..x] {
            p.push(s);
        }
        p
    }

    pub fn into_parts(self) -> (Option<BlockSchedule>, Vec<Symbol>) {
        (self.schedule, self.symbols)
    }
}

impl SymbolicSequence for Materialized {
    fn schedule(&self) -> Option<&BlockSchedule> {
        self.schedule.as_ref()
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.symbols.len() as u64)
    }

    fn symbol(&self, j: u64) -> Result<Symbol> {
        self.check_range(j, j)?;
        Ok(self.symbols[j as usize - 1])
    }

    fn psi_range(&self, lo: u64, hi: u64) -> Result<Psi> {
        if hi < lo {
            return Ok(Psi::ZERO);
        }
        self.check_range(lo, hi)?;
        Ok(self.prefix(hi).minus(self.prefix(lo - 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn prefix_sums_match_streaming() {
        let syms: Vec<Symbol> = (0..1000u32)
            .map(|i| Symbol::from_index(((i * 7 + i / 3) % 3) as u8).unwrap())
            .collect();
        let m = Materialized::new(None, syms.clone());
        for (lo, hi) in [(1, 1), (1, 256), (255, 513), (700, 1000), (1000, 1000)] {
            let mut p = Psi::ZERO;
            for &s in &syms[lo as usize - 1..hi as usize] {
                p.push(s);
            }
            assert_eq!(m.psi_range(lo, hi).unwrap(), p);
        }
        assert!(m.symbol(1001).is_err());
        assert!(m.symbol(0).is_err());
    }

    #[test]
    fn corruption_changes_one_symbol() {
        let m = Materialized::new(None, vec![Symbol::Zero; 600]);
        let c = m.with_symbol(300, Symbol::Two).unwrap();
        assert_eq!(c.psi_range(1, 600).unwrap(), Psi::new(0, 1));
        assert_eq!(c.symbol(300).unwrap(), Symbol::Two);
    }
}
