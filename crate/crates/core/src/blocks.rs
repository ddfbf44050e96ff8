//! The nested block structure shared by all three constructions.
//!
//! A schedule is a triple `(a_1, (b_n), (d_n))` with `d_{n+1}` a multiple of
//! `d_n`. It determines `a_{n+1} = (b_n d_n + 1) a_n`, the level sets
//! `A_n = [1, a_n] + a_n d_n N`, their unions `B_n = A_1 ∪ … ∪ A_n`, and the
//! densities `delta_n = sum_{j <= n} 1/d_j`. Indices are 1-based.
//!
//! The maximal intervals of `A_n` are the *blocks of level n*; every block
//! other than the initial `[1, a_n]` is a *repeated block*.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::report::Report;

/// A per-level positive integer rule for `b_n` or `d_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum LevelRule {
    /// The same value at every level.
    Constant { value: u64 },
    /// `2^(n + offset)` at level `n`.
    Pow2 { offset: i64 },
    /// Explicit values for levels `1..=values.len()`.
    List { values: Vec<u64> },
}

impl LevelRule {
    pub fn value(&self, n: usize) -> Option<BigUint> {
        match self {
            LevelRule::Constant { value } => Some(BigUint::from(*value)),
            LevelRule::Pow2 { offset } => {
                let e = n as i64 + offset;
                (e >= 0).then(|| BigUint::one() << (e as usize))
            }
            LevelRule::List { values } => {
                n.checked_sub(1).and_then(|i| values.get(i)).map(|&v| BigUint::from(v))
            }
        }
    }

    /// Number of levels the rule defines, if finite.
    pub fn defined_levels(&self) -> Option<usize> {
        match self {
            LevelRule::List { values } => Some(values.len()),
            _ => None,
        }
    }
}

/// A closed 1-based integer interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexInterval {
    pub lo: BigUint,
    pub hi: BigUint,
}

impl IndexInterval {
    pub fn new(lo: BigUint, hi: BigUint) -> Result<Self> {
        if lo.is_zero() || lo > hi {
            return Err(Error::IndexOutOfRange(format!("[{lo}, {hi}]")));
        }
        Ok(IndexInterval { lo, hi })
    }

    pub fn len(&self) -> BigUint {
        &self.hi - &self.lo + 1u32
    }

    pub fn contains(&self, j: &BigUint) -> bool {
        &self.lo <= j && j <= &self.hi
    }

    pub fn is_repeated(&self) -> bool {
        !self.lo.is_one()
    }
}

impl fmt::Display for IndexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Cached per-level values of a schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub a: BigUint,
    pub b: BigUint,
    pub d: BigUint,
    /// `a_n d_n`, the period of `A_n`.
    pub period: BigUint,
    /// `delta_n = sum_{j <= n} 1/d_j`.
    pub delta: BigRational,
}

/// The parameter triple `(a_1, b, d)` with `a_n`, `a_n d_n` and `delta_n`
/// cached for levels `1..=max_level`. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSchedule {
    a1: u64,
    b: LevelRule,
    d: LevelRule,
    levels: Vec<Level>,
    small: Grid<u128>,
}

impl BlockSchedule {
    pub fn new(a1: u64, b: LevelRule, d: LevelRule, max_level: usize) -> Result<Self> {
        if a1 == 0 {
            return Err(Error::InvalidSchedule("a1 must be positive".into()));
        }
        if max_level == 0 {
            return Err(Error::InvalidSchedule("at least one level is required".into()));
        }
        for rule in [&b, &d] {
            if let Some(n) = rule.defined_levels() {
                if n < max_level {
                    return Err(Error::InvalidSchedule(format!(
                        "rule defines {n} levels but {max_level} were requested"
                    )));
                }
            }
        }
        let mut levels: Vec<Level> = Vec::with_capacity(max_level);
        let mut a = BigUint::from(a1);
        let mut delta = BigRational::zero();
        for n in 1..=max_level {
            let bn = b
                .value(n)
                .ok_or_else(|| Error::InvalidSchedule(format!("b_{n} undefined")))?;
            let dn = d
                .value(n)
                .ok_or_else(|| Error::InvalidSchedule(format!("d_{n} undefined")))?;
            if bn.is_zero() || dn.is_zero() {
                return Err(Error::InvalidSchedule(format!("b_{n} and d_{n} must be positive")));
            }
            if let Some(prev) = levels.last() {
                if !(&dn % &prev.d).is_zero() {
                    return Err(Error::InvalidSchedule(format!(
                        "d_{n} = {dn} is not a multiple of d_{} = {}",
                        n - 1,
                        prev.d
                    )));
                }
            }
            delta += BigRational::new(BigInt::one(), BigInt::from(dn.clone()));
            let period = &a * &dn;
            let next = (&bn * &dn + 1u32) * &a;
            levels.push(Level {
                a: core::mem::replace(&mut a, next),
                b: bn,
                d: dn,
                period,
                delta: delta.clone(),
            });
        }
        let small = Grid::small_from_levels(&levels);
        Ok(BlockSchedule {
            a1,
            b,
            d,
            levels,
            small,
        })
    }

    pub fn a1(&self) -> u64 {
        self.a1
    }

    pub fn b_rule(&self) -> &LevelRule {
        &self.b
    }

    pub fn d_rule(&self) -> &LevelRule {
        &self.d
    }

    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        n.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .ok_or(Error::LevelOutOfRange {
                level: n,
                max_level: self.levels.len(),
            })
    }

    pub(crate) fn levels(&self) -> &[Level] {
        &self.levels
    }

    fn lv(&self, n: usize) -> &Level {
        match self.level(n) {
            Ok(l) => l,
            Err(e) => panic!("{e}"),
        }
    }

    /// `a_n`. Panics if `n` is zero or beyond `max_level`.
    pub fn a(&self, n: usize) -> &BigUint {
        &self.lv(n).a
    }

    pub fn b(&self, n: usize) -> &BigUint {
        &self.lv(n).b
    }

    pub fn d(&self, n: usize) -> &BigUint {
        &self.lv(n).d
    }

    /// `a_n d_n`.
    pub fn period(&self, n: usize) -> &BigUint {
        &self.lv(n).period
    }

    pub fn delta(&self, n: usize) -> &BigRational {
        &self.lv(n).delta
    }

    /// `a_n` when it fits in a `u64`.
    pub fn a_u64(&self, n: usize) -> Option<u64> {
        self.a(n).to_u64()
    }

    pub fn period_u64(&self, n: usize) -> Option<u64> {
        self.period(n).to_u64()
    }

    /// `delta_inf = sup_n delta_n`, or `None` when the series diverges.
    pub fn delta_infinity(&self) -> Option<BigRational> {
        match &self.d {
            LevelRule::Constant { .. } => None,
            LevelRule::Pow2 { offset } => {
                let one = BigInt::one();
                Some(if *offset >= 0 {
                    BigRational::new(one.clone(), one << (*offset as usize))
                } else {
                    BigRational::from_integer(one << ((-offset) as usize))
                })
            }
            LevelRule::List { .. } => Some(self.levels.last().unwrap().delta.clone()),
        }
    }

    /// `j ∈ A_n`, i.e. `(j - 1) mod a_n d_n < a_n`.
    pub fn in_level(&self, j: &BigUint, n: usize) -> bool {
        let lv = self.lv(n);
        if j.is_zero() {
            return false;
        }
        (j - 1u32) % &lv.period < lv.a
    }

    pub fn in_level_u64(&self, j: u64, n: usize) -> bool {
        match self.small.level(n) {
            Some(_) => self.small.in_level(j as u128, n),
            None => self.in_level(&BigUint::from(j), n),
        }
    }

    /// `j ∈ B_n`. `B_0` is empty.
    pub fn in_b(&self, j: &BigUint, n: usize) -> bool {
        (1..=n).any(|i| self.in_level(j, i))
    }

    pub fn in_b_u64(&self, j: u64, n: usize) -> bool {
        (1..=n).any(|i| self.in_level_u64(j, i))
    }

    /// The level-`n` block containing `j`, if `j ∈ A_n`.
    pub fn enclosing_block(&self, j: &BigUint, n: usize) -> Option<IndexInterval> {
        let lv = self.lv(n);
        if j.is_zero() {
            return None;
        }
        let off = (j - 1u32) % &lv.period;
        if off >= lv.a {
            return None;
        }
        let lo = j - off;
        let hi = &lo + &lv.a - 1u32;
        Some(IndexInterval { lo, hi })
    }

    /// Smallest cached `N` with `j <= a_N`.
    pub fn covering_level(&self, j: &BigUint) -> Option<usize> {
        self.levels.iter().position(|l| j <= &l.a).map(|i| i + 1)
    }

    /// Smallest cached level `m` with `j ∈ A_m`: the level at which the
    /// symbol at `j` is fixed, and `a_m d_m` is a period for it.
    pub fn fill_level(&self, j: &BigUint) -> Option<usize> {
        if j.is_zero() {
            return None;
        }
        (1..=self.max_level()).find(|&m| self.in_level(j, m))
    }

    pub fn fill_level_u64(&self, j: u64) -> Option<usize> {
        if j == 0 {
            return None;
        }
        (1..=self.max_level()).find(|&m| self.in_level_u64(j, m))
    }

    /// Length of the longest chain of blocks `B_1 ⊋ B_2 ⊋ … ⊋ B_d` containing
    /// `j`, with `B_1` an initial block and each later block strictly inside
    /// its predecessor (both endpoints strictly interior).
    ///
    /// Computed by descent: take the highest-level repeated block around `j`
    /// that is strictly interior to the current block, translate `j` into the
    /// initial copy of that block and repeat.
    pub fn depth(&self, j: &BigUint) -> Result<usize> {
        if j.is_zero() {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        let top = self
            .covering_level(j)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{j} exceeds a_{}", self.max_level())))?;
        let mut depth = 1;
        let mut j = j.clone();
        // Blocks at levels >= top around j are all initial; the outer limit
        // is the (unbounded) initial block above them.
        let mut limit: Option<BigUint> = None;
        let mut below = top;
        loop {
            let mut next = None;
            for k in (1..below).rev() {
                if let Some(block) = self.enclosing_block(&j, k) {
                    let interior = block.is_repeated()
                        && limit.as_ref().is_none_or(|l| &block.hi < l);
                    if interior {
                        next = Some((k, block));
                        break;
                    }
                }
            }
            match next {
                None => return Ok(depth),
                Some((k, block)) => {
                    depth += 1;
                    j = &j - &block.lo + 1u32;
                    limit = Some(self.a(k).clone());
                    below = k;
                }
            }
        }
    }

    /// `|B_n ∩ [1, x]|`.
    pub fn count_b_prefix(&self, n: usize, x: &BigUint) -> BigUint {
        let big = Grid::big_from_levels(&self.levels[..n.min(self.levels.len())]);
        big.count_b_prefix(n, x.clone())
    }

    /// Checks the structural facts on `[1, horizon]`: every block starts and
    /// ends with blocks of each lower level; disjoint blocks of levels
    /// `k <= k'` are at least `(d_k - 1) a_k` apart; and windows of length at
    /// least `a_n d_n / m` meet `B_n` with density at most `m delta_n`.
    pub fn verify_facts(&self, horizon: u64, m: u64) -> Result<Vec<Report>> {
        if horizon == 0 || m == 0 {
            return Err(Error::InvalidParams("horizon and M must be positive".into()));
        }
        if horizon > crate::DEFAULT_MATERIALIZATION_CAP {
            return Err(Error::BudgetExceeded {
                budget: crate::DEFAULT_MATERIALIZATION_CAP,
            });
        }
        // Levels whose first block fits in the horizon.
        let top = (1..=self.max_level())
            .take_while(|&n| self.a_u64(n).is_some_and(|a| a <= horizon))
            .last()
            .unwrap_or(0);
        let mut out = vec![self.check_nesting(horizon, top), self.check_gaps(horizon, top)];
        out.push(self.check_density(horizon, m)?);
        Ok(out)
    }

    fn blocks_u64(&self, n: usize, horizon: u64) -> impl Iterator<Item = (u64, u64)> {
        let a = self.a_u64(n).unwrap_or(u64::MAX);
        let p = self.period_u64(n).unwrap_or(u64::MAX);
        (0..)
            .map(move |t: u64| t.checked_mul(p).map(|s| s + 1))
            .take_while(move |s| s.is_some_and(|s| s.saturating_add(a - 1) <= horizon))
            .map(move |s| {
                let s = s.unwrap();
                (s, s + a - 1)
            })
    }

    fn check_nesting(&self, horizon: u64, top: usize) -> Report {
        let mut r = Report::new("block_nesting", "every block starts and ends with a block of each lower level");
        let mut checked = 0u64;
        for kp in 2..=top {
            for (lo, hi) in self.blocks_u64(kp, horizon) {
                for k in 1..kp {
                    let a = self.a_u64(k).unwrap();
                    let p = self.period_u64(k).unwrap();
                    checked += 1;
                    if (lo - 1) % p != 0 || !(hi - a).is_multiple_of(p) {
                        r.fail(format!("level-{kp} block [{lo}, {hi}] vs level {k}"));
                    }
                }
            }
        }
        r.stat("pairs_checked", checked);
        r
    }

    fn check_gaps(&self, horizon: u64, top: usize) -> Report {
        let mut r = Report::new(
            "block_gaps",
            "disjoint blocks of levels k <= k' are separated by at least (d_k - 1) a_k",
        );
        let mut min_slack: Option<i128> = None;
        let mut checked = 0u64;
        for k in 1..=top {
            let need = (self.d(k).to_u64().unwrap() - 1) * self.a_u64(k).unwrap();
            for kp in k..=top {
                let a2 = self.a_u64(kp).unwrap();
                let p2 = self.period_u64(kp).unwrap();
                for (lo, hi) in self.blocks_u64(k, horizon) {
                    // Nearest disjoint level-k' block to the right.
                    let r0 = hi % p2;
                    let s = if r0 == 0 { hi + 1 } else { hi + 1 + (p2 - r0) };
                    let mut gaps = Vec::with_capacity(2);
                    if s.checked_add(a2 - 1).is_some_and(|e| e <= horizon) {
                        gaps.push(s - hi - 1);
                    }
                    // Nearest disjoint level-k' block to the left.
                    if lo > 1 {
                        let mut s = (lo - 2) - (lo - 2) % p2 + 1;
                        if s + a2 > lo {
                            s = s.saturating_sub(p2);
                        }
                        if s >= 1 {
                            gaps.push(lo - (s + a2 - 1) - 1);
                        }
                    }
                    for g in gaps {
                        checked += 1;
                        let slack = g as i128 - need as i128;
                        min_slack = Some(min_slack.map_or(slack, |m| m.min(slack)));
                        if g < need {
                            r.fail(format!(
                                "level-{k} block [{lo}, {hi}] is {g} from a level-{kp} block (< {need})"
                            ));
                        }
                    }
                }
            }
        }
        r.stat("pairs_checked", checked);
        if let Some(s) = min_slack {
            r.stat("min_slack", s);
        }
        r
    }

    fn check_density(&self, horizon: u64, m: u64) -> Result<Report> {
        let mut r = Report::new(
            "block_density",
            "windows of length >= a_n d_n / M meet B_n with density <= M delta_n",
        );
        let exhaustive = horizon <= 10_000;
        r.stat("mode", if exhaustive { "exhaustive" } else { "sampled" });
        r.stat("M", m);
        let h = horizon as usize;
        let mut checked = 0u64;
        let mut worst = (0u64, 1u64);
        for n in 1..=self.max_level() {
            let Some(p) = self.period_u64(n) else { break };
            let min_len = p.div_ceil(m);
            if min_len > horizon {
                break;
            }
            // prefix[x] = |B_n ∩ [1, x]|
            let mut prefix = vec![0u32; h + 1];
            for j in 1..=horizon {
                prefix[j as usize] = prefix[j as usize - 1] + self.in_b_u64(j, n) as u32;
            }
            let delta = self.delta(n);
            let (dn, dd) = (
                delta.numer().to_u128().unwrap(),
                delta.denom().to_u128().unwrap(),
            );
            let mut check = |lo: u64, len: u64, r: &mut Report| {
                let hi = lo + len - 1;
                let hits = (prefix[hi as usize] - prefix[lo as usize - 1]) as u128;
                checked += 1;
                if hits * worst.1 as u128 > worst.0 as u128 * len as u128 {
                    worst = (hits as u64, len);
                }
                // hits / len <= m * delta_n
                if hits * dd > m as u128 * dn * len as u128 {
                    r.fail(format!("n={n}: [{lo}, {hi}] has {hits} of {len} positions in B_n"));
                }
            };
            if exhaustive {
                for len in min_len..=horizon {
                    for lo in 1..=horizon - len + 1 {
                        check(lo, len, &mut r);
                    }
                }
            } else {
                let mut lens: Vec<u64> = (1..=64).map(|k| k * min_len).collect();
                let mut l = min_len;
                while l <= horizon {
                    lens.push(l);
                    l = l.saturating_mul(2);
                }
                lens.extend((1..=64).map(|k| k * p));
                lens.sort_unstable();
                lens.dedup();
                lens.retain(|&l| l <= horizon);
                let stride = (horizon / 2000).max(1);
                for &len in &lens {
                    let mut lo = 1;
                    while lo + len - 1 <= horizon {
                        check(lo, len, &mut r);
                        lo += stride;
                    }
                }
            }
        }
        r.stat("intervals_checked", checked);
        r.stat("max_density", format!("{}/{}", worst.0, worst.1));
        Ok(r)
    }
}

/// Fixed-width or big-integer view of the cached levels, used by hot paths.
pub(crate) trait Idx: Clone + Ord + Integer + From<u64> + fmt::Debug {
    fn from_big(b: &BigUint) -> Option<Self>;
    fn to_big(&self) -> BigUint;
}

impl Idx for u128 {
    fn from_big(b: &BigUint) -> Option<Self> {
        b.to_u128()
    }

    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Idx for BigUint {
    fn from_big(b: &BigUint) -> Option<Self> {
        Some(b.clone())
    }

    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct GridLevel<T> {
    pub a: T,
    pub period: T,
}

/// Levels `1..=len` whose values are representable in `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Grid<T> {
    pub levels: Vec<GridLevel<T>>,
}

impl Grid<u128> {
    fn small_from_levels(levels: &[Level]) -> Self {
        let levels = levels
            .iter()
            .map_while(|l| {
                Some(GridLevel {
                    a: l.a.to_u128()?,
                    period: l.period.to_u128()?,
                })
            })
            .collect();
        Grid { levels }
    }
}

impl Grid<BigUint> {
    pub(crate) fn big_from_levels(levels: &[Level]) -> Self {
        Grid {
            levels: levels
                .iter()
                .map(|l| GridLevel {
                    a: l.a.clone(),
                    period: l.period.clone(),
                })
                .collect(),
        }
    }
}

impl<T: Idx> Grid<T> {
    pub fn level(&self, n: usize) -> Option<&GridLevel<T>> {
        n.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn in_level(&self, j: T, n: usize) -> bool {
        let l = &self.levels[n - 1];
        if j.is_zero() {
            return false;
        }
        (j - T::one()).mod_floor(&l.period) < l.a
    }

    /// `|B_n ∩ [1, x]|`.
    pub fn count_b_prefix(&self, n: usize, x: T) -> T {
        if n == 0 || x.is_zero() {
            return T::zero();
        }
        let l = &self.levels[n - 1];
        let (q, r) = x.div_rem(&l.period);
        let full = if q.is_zero() {
            T::zero()
        } else {
            q * self.count_b_cell(n)
        };
        full + self.count_b_cell_prefix(n, r)
    }

    /// `|B_n ∩ [1, a_n d_n]|`.
    fn count_b_cell(&self, n: usize) -> T {
        let l = &self.levels[n - 1];
        self.count_b_cell_prefix(n, l.period.clone())
    }

    /// `|B_n ∩ [1, r]|` for `r <= a_n d_n`.
    fn count_b_cell_prefix(&self, n: usize, r: T) -> T {
        let l = &self.levels[n - 1];
        if r <= l.a {
            r
        } else {
            l.a.clone() + self.count_b_prefix(n - 1, r) - self.count_b_prefix(n - 1, l.a.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy() -> BlockSchedule {
        BlockSchedule::new(
            4,
            LevelRule::Constant { value: 1 },
            LevelRule::Pow2 { offset: 0 },
            8,
        )
        .unwrap()
    }

    fn big(j: u64) -> BigUint {
        BigUint::from(j)
    }

    #[test]
    fn a_values() {
        let s = toy();
        assert_eq!(s.a(1), &big(4));
        assert_eq!(s.a(2), &big(12));
        assert_eq!(s.a(3), &big(60));
        let p = BlockSchedule::new(
            3332,
            LevelRule::Constant { value: 3332 },
            LevelRule::Pow2 { offset: 5 },
            3,
        )
        .unwrap();
        assert_eq!(p.a(2), &(big(3332 * 64 + 1) * big(3332)));
        assert_eq!(p.a(2), &big(710_545_668));
    }

    #[test]
    fn membership_examples() {
        let s = toy();
        assert!(s.in_level(&big(9), 1));
        assert!(!s.in_level(&big(5), 1));
        assert!(!s.in_level(&big(13), 2));
        assert!(s.in_b(&big(9), 2));
        assert!(!s.in_b(&big(5), 1));
        assert!(!s.in_b(&big(5), 0));
        for n in 1..=4 {
            let a = s.a_u64(n).unwrap();
            assert!((1..=a).all(|j| s.in_b_u64(j, n)));
        }
    }

    #[test]
    fn enclosing_block_examples() {
        let s = toy();
        let b = s.enclosing_block(&big(10), 1).unwrap();
        assert_eq!((b.lo, b.hi), (big(9), big(12)));
        let b = s.enclosing_block(&big(3), 2).unwrap();
        assert_eq!((b.lo.clone(), b.hi.clone()), (big(1), big(12)));
        assert!(!b.is_repeated());
        assert!(s.enclosing_block(&big(5), 1).is_none());
    }

    #[test]
    fn depth_examples() {
        let s = toy();
        assert_eq!(s.depth(&big(5)).unwrap(), 1);
        assert_eq!(s.depth(&big(9)).unwrap(), 2);
        assert_eq!(s.depth(&big(1)).unwrap(), 1);
        assert!(s.depth(&big(0)).is_err());
    }

    #[test]
    fn rejects_non_divisible_d() {
        let e = BlockSchedule::new(
            4,
            LevelRule::Constant { value: 1 },
            LevelRule::List { values: vec![2, 3, 6] },
            3,
        );
        assert!(matches!(e, Err(Error::InvalidSchedule(_))));
        let short = BlockSchedule::new(
            4,
            LevelRule::Constant { value: 1 },
            LevelRule::List { values: vec![2, 4] },
            3,
        );
        assert!(short.is_err());
    }

    #[test]
    fn delta_values_are_exact() {
        let s = toy();
        assert_eq!(s.delta(1), &BigRational::new(1.into(), 2.into()));
        assert_eq!(s.delta(3), &BigRational::new(7.into(), 8.into()));
        assert_eq!(s.delta_infinity().unwrap(), BigRational::one());
        let p = BlockSchedule::new(
            1,
            LevelRule::Constant { value: 1 },
            LevelRule::Pow2 { offset: 5 },
            2,
        )
        .unwrap();
        assert_eq!(
            p.delta_infinity().unwrap(),
            BigRational::new(1.into(), 32.into())
        );
        for n in 2..=s.max_level() {
            assert!(s.delta(n) > s.delta(n - 1));
        }
    }

    #[test]
    fn gap_between_first_blocks() {
        // [1,4] and [9,12] are 4 = (d_1 - 1) a_1 apart.
        let s = toy();
        let reports = s.verify_facts(12, 2).unwrap();
        let f2 = &reports[1];
        assert!(f2.passed());
        assert_eq!(f2.statistics["min_slack"], "0");
    }

    #[test]
    fn count_prefix_matches_scan() {
        let s = toy();
        for n in 1..=4 {
            let mut c = 0u64;
            for x in 1..=2000u64 {
                c += s.in_b_u64(x, n) as u64;
                assert_eq!(s.count_b_prefix(n, &big(x)), big(c), "n={n} x={x}");
            }
        }
    }
}
