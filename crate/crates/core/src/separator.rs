//! The plane-separating construction.
//!
//! With `a_1 = b_n = (3L + 4)K` and even `d_n`, the step from level `n` to
//! level `n + 1` cuts `[1, a_{n+1}]` into seven consecutive intervals. Every
//! position of `[1, a_{n+1}]` not already covered by `B_n` receives the symbol
//! of its interval; the level pattern then repeats with period
//! `a_{n+1} d_{n+1}`. The pattern on `[1, a_1]` is all zeros.
//!
//! Level patterns are far too long to store (`a_2` is already about `7·10^8`
//! for `K = 17`, `L = 64`), so the sequence is evaluated pointwise, and window
//! sums come from exact prefix counts derived from the block structure
//! rather than from enumeration.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::{BlockSchedule, Grid, Idx, LevelRule};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::sequence::SymbolicSequence;
use crate::symbol::{Psi, Symbol};

/// Levels cached by default; `a_6` is about `10^33` for `K = 17`, `L = 64`.
pub const DEFAULT_LEVELS: usize = 6;

/// The seven intervals of one level, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntervalTag {
    /// First zero interval.
    I01,
    /// First one interval.
    I11,
    /// The central two interval `[p_n, q_n]`.
    I12c,
    /// Second one interval.
    I12,
    /// Second zero interval.
    I02,
    /// Second two interval.
    I22,
    /// Third zero interval.
    I03,
}

impl IntervalTag {
    pub const ALL: [IntervalTag; 7] = [
        IntervalTag::I01,
        IntervalTag::I11,
        IntervalTag::I12c,
        IntervalTag::I12,
        IntervalTag::I02,
        IntervalTag::I22,
        IntervalTag::I03,
    ];

    /// Symbol written on the free positions of the interval.
    pub fn symbol(self) -> Symbol {
        match self {
            IntervalTag::I01 | IntervalTag::I02 | IntervalTag::I03 => Symbol::Zero,
            IntervalTag::I11 | IntervalTag::I12 => Symbol::One,
            IntervalTag::I12c | IntervalTag::I22 => Symbol::Two,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IntervalTag::I01 => "I01",
            IntervalTag::I11 => "I11",
            IntervalTag::I12c => "I12c",
            IntervalTag::I12 => "I12",
            IntervalTag::I02 => "I02",
            IntervalTag::I22 => "I22",
            IntervalTag::I03 => "I03",
        }
    }
}

impl fmt::Display for IntervalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A signed closed interval; lengths can be non-positive for degenerate
/// toy-mode parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub lo: BigInt,
    pub hi: BigInt,
}

impl Span {
    pub fn len(&self) -> BigInt {
        &self.hi - &self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, j: &BigInt) -> bool {
        &self.lo <= j && j <= &self.hi
    }

    pub fn lo_u64(&self) -> Option<u64> {
        self.lo.to_u64()
    }

    pub fn hi_u64(&self) -> Option<u64> {
        self.hi.to_u64()
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// The seven intervals of `[1, a_{n+1}]` at level `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalDecomposition {
    pub level: usize,
    pub p: BigInt,
    pub q: BigInt,
    pub intervals: [(IntervalTag, Span); 7],
    /// `I11 ∪ I12c ∪ I12`.
    pub istar: Span,
    /// Whether the intervals partition `[1, a_{n+1}]` in order.
    pub is_partition: bool,
}

impl IntervalDecomposition {
    pub fn interval(&self, tag: IntervalTag) -> &Span {
        &self.intervals[tag as usize].1
    }

    /// The central interval `[p_n, q_n]`.
    pub fn central(&self) -> &Span {
        self.interval(IntervalTag::I12c)
    }
}

/// Constants `K`, `L` and the schedule with `a_1 = b_n = (3L + 4)K`.
#[derive(Debug, Clone)]
pub struct SeparatorParams {
    k: u64,
    l: u64,
    schedule: BlockSchedule,
    toy_mode: bool,
}

impl SeparatorParams {
    /// Validates `K >= 17`, `L >= 64`, even `d_n`, `delta_inf <= 1/32` and
    /// `a_{n+1} >= 8 a_n b_n`. In toy mode only the conditions needed for
    /// the construction to be well defined (even `d_n`) are enforced.
    pub fn new(k: u64, l: u64, d: LevelRule, max_level: usize, toy_mode: bool) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidParams("K and L must be positive".into()));
        }
        let b = (3 * l + 4) * k;
        let schedule = BlockSchedule::new(b, LevelRule::Constant { value: b }, d, max_level)?;
        for n in 1..=max_level {
            if schedule.d(n).is_odd() {
                return Err(Error::InvalidParams(format!("d_{n} = {} is odd", schedule.d(n))));
            }
        }
        if !toy_mode {
            if k < 17 {
                return Err(Error::InvalidParams(format!("K = {k} violates K >= 17")));
            }
            if l < 64 {
                return Err(Error::InvalidParams(format!("L = {l} violates L >= 64")));
            }
            let bound = BigRational::new(BigInt::one(), BigInt::from(32));
            match schedule.delta_infinity() {
                Some(d) if d <= bound => {}
                Some(d) => {
                    return Err(Error::InvalidParams(format!(
                        "delta_inf = {d} violates delta_inf <= 1/32"
                    )))
                }
                None => {
                    return Err(Error::InvalidParams(
                        "delta_inf diverges; it must be at most 1/32".into(),
                    ))
                }
            }
            for n in 1..max_level {
                if schedule.a(n + 1) < &(BigUint::from(8u32) * schedule.a(n) * schedule.b(n)) {
                    return Err(Error::InvalidParams(format!(
                        "a_{} < 8 a_{n} b_{n}",
                        n + 1
                    )));
                }
            }
        }
        Ok(SeparatorParams {
            k,
            l,
            schedule,
            toy_mode,
        })
    }

    /// `d_n = 2^(n + dexp)`.
    pub fn with_pow2(k: u64, l: u64, dexp: i64, max_level: usize, toy_mode: bool) -> Result<Self> {
        Self::new(k, l, LevelRule::Pow2 { offset: dexp }, max_level, toy_mode)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn a1(&self) -> u64 {
        self.schedule.a1()
    }

    pub fn toy_mode(&self) -> bool {
        self.toy_mode
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    /// `p_n` and `q_n`.
    pub fn p_q(&self, n: usize) -> (BigInt, BigInt) {
        let s = &self.schedule;
        let per = BigInt::from(s.period(n).clone());
        let half_sum: BigInt = (1..=n)
            .map(|j| BigInt::from(s.period(j).clone()) / 2)
            .sum();
        let center = BigInt::from((self.l + 1) * self.k) * &per;
        let p = &center - &per + 1 + &half_sum;
        let q = &center + &per - &half_sum - 1;
        (p, q)
    }

    /// The decomposition of `[1, a_{n+1}]`; requires `n + 1 <= max_level`.
    pub fn decompose(&self, n: usize) -> Result<IntervalDecomposition> {
        let s = &self.schedule;
        if n == 0 || n + 1 > s.max_level() {
            return Err(Error::LevelOutOfRange {
                level: n + 1,
                max_level: s.max_level(),
            });
        }
        let a = BigInt::from(s.a(n).clone());
        let d = BigInt::from(s.d(n).clone());
        let next = BigInt::from(s.a(n + 1).clone());
        let (k, l) = (BigInt::from(self.k), BigInt::from(self.l));
        let (p, q) = self.p_q(n);
        let kda = &k * &d * &a;
        let e01: BigInt = (&l * &k * &d + 1) * &a;
        let e12: BigInt = (&l + 2) * &kda;
        let e02: BigInt = ((BigInt::from(2) * &l + 2) * &k * &d + 1) * &a;
        let e22: BigInt = (BigInt::from(2) * &l + 4) * &kda;
        let span = |lo: BigInt, hi: BigInt| Span { lo, hi };
        let intervals = [
            (IntervalTag::I01, span(BigInt::one(), e01.clone())),
            (IntervalTag::I11, span(&e01 + 1, &p - 1)),
            (IntervalTag::I12c, span(p.clone(), q.clone())),
            (IntervalTag::I12, span(&q + 1, e12.clone())),
            (IntervalTag::I02, span(&e12 + 1, e02.clone())),
            (IntervalTag::I22, span(&e02 + 1, e22.clone())),
            (IntervalTag::I03, span(&e22 + 1, next.clone())),
        ];
        let is_partition = intervals.iter().all(|(_, sp)| !sp.is_empty())
            && intervals.windows(2).all(|w| w[0].1.hi.clone() + 1 == w[1].1.lo)
            && intervals[6].1.hi == next;
        Ok(IntervalDecomposition {
            level: n,
            istar: span(&e01 + 1, e12),
            p,
            q,
            intervals,
            is_partition,
        })
    }

    /// The interval of the level-`n` decomposition containing `j`.
    pub fn classify(&self, j: &BigUint, n: usize) -> Result<IntervalTag> {
        let dec = self.decompose(n)?;
        let j = BigInt::from(j.clone());
        dec.intervals
            .iter()
            .find(|(_, sp)| sp.contains(&j))
            .map(|(t, _)| *t)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{j} is outside [1, a_{}]", n + 1)))
    }

    /// Exact checks of the interval properties at level `n`.
    pub fn verify_pq(&self, n: usize) -> Result<Vec<Report>> {
        let dec = self.decompose(n)?;
        let s = &self.schedule;
        let a = BigInt::from(s.a(n).clone());
        let d = BigInt::from(s.d(n).clone());
        let per = BigInt::from(s.period(n).clone());
        let k = BigInt::from(self.k);
        let l = BigInt::from(self.l);
        let len = |t: IntervalTag| dec.interval(t).len();
        let level_block_start = |x: &BigInt, kk: usize| -> bool {
            let p = BigInt::from(s.period(kk).clone());
            x >= &BigInt::one() && (x - 1i32).mod_floor(&p).is_zero()
        };
        let level_block_end = |x: &BigInt, kk: usize| -> bool {
            let p = BigInt::from(s.period(kk).clone());
            let ak = BigInt::from(s.a(kk).clone());
            x >= &ak && (x - &ak).mod_floor(&p).is_zero()
        };
        let mut out = Vec::with_capacity(7);

        let mut r = Report::new("partition", "the seven intervals partition [1, a_{n+1}] in order");
        if !dec.is_partition {
            for (t, sp) in &dec.intervals {
                r.stat(t.as_str(), sp);
            }
            r.fail("intervals are empty, overlapping or leave gaps");
        }
        out.push(r);

        let mut r = Report::new(
            "pq_outer_lengths",
            "I01, I02, I03 have length (LKd_n + 1)a_n and start and end with blocks of every level k <= n",
        );
        let want = (&l * &k * &d + 1) * &a;
        for t in [IntervalTag::I01, IntervalTag::I02, IntervalTag::I03] {
            let sp = dec.interval(t);
            if sp.len() != want {
                r.fail(format!("|{t}| = {} != {want}", sp.len()));
            }
            for kk in 1..=n {
                if !level_block_start(&sp.lo, kk) || !level_block_end(&sp.hi, kk) {
                    r.fail(format!("{t} = {sp} is not bounded by level-{kk} blocks"));
                }
            }
        }
        out.push(r);

        let mut r = Report::new("pq_long_lengths", "(K - 1)a_n d_n <= |I11|, |I12| <= K a_n d_n");
        let (lo, hi) = ((&k - 1) * &per, &k * &per);
        for t in [IntervalTag::I11, IntervalTag::I12] {
            let x = len(t);
            r.stat(t.as_str(), &x);
            if x < lo || x > hi {
                r.fail(format!("|{t}| = {x} outside [{lo}, {hi}]"));
            }
        }
        out.push(r);

        let mut r = Report::new("pq_central_length", "a_n d_n / 2 <= |I12c| <= a_n d_n");
        let x = len(IntervalTag::I12c);
        r.stat("len", &x);
        if BigInt::from(2) * &x < per || x > per {
            r.fail(format!("|I12c| = {x} outside [{}/2, {per}]", per));
        }
        out.push(r);

        // A level-n block inside I12c whose midpoint is within half a block
        // (plus one) of the midpoint of I12c.
        let mut r = Report::new(
            "pq_central_block",
            "I12c is centred on a level-n block, up to the block's own length",
        );
        let c = dec.central();
        let twice_mid = &c.lo + &c.hi;
        let s0 = {
            let m: BigInt = &twice_mid / 2;
            let off: BigInt = (&m - 1i32).mod_floor(&per);
            &m - off
        };
        let best = [s0.clone() - &per, s0.clone(), s0 + &per]
            .into_iter()
            .filter(|st| st >= &BigInt::one())
            .map(|st| {
                let off: BigInt = BigInt::from(2) * &st + &a - 1 - &twice_mid;
                let off = off.abs();
                (off, st)
            })
            .min();
        match best {
            Some((off, st)) => {
                let hi: BigInt = &st + &a - 1;
                r.stat("block", Span { lo: st.clone(), hi: hi.clone() });
                r.stat("twice_center_offset", &off);
                if st < c.lo || hi > c.hi {
                    r.fail(format!("nearest level-n block [{st}, {hi}] is not inside I12c = {c}"));
                }
                if off > &a + 1 {
                    r.fail(format!("centre offset {off}/2 exceeds (a_n + 1)/2"));
                }
            }
            None => r.fail("no level-n block near I12c"),
        }
        out.push(r);

        let mut r = Report::new("pq_block_distance", "p_n and q_n are at least a_k d_k / 4 from every block of level k <= n");
        for (name, x) in [("p", &dec.p), ("q", &dec.q)] {
            for kk in 1..=n {
                let pk = BigInt::from(s.period(kk).clone());
                let ak = BigInt::from(s.a(kk).clone());
                let dist = distance_to_blocks(x, &ak, &pk);
                r.stat(&format!("{name}_dist_level{kk}"), &dist);
                if BigInt::from(4) * &dist < pk {
                    r.fail(format!("{name}_{n} = {x} is {dist} from a level-{kk} block (< {pk}/4)"));
                }
            }
        }
        out.push(r);

        let mut r = Report::new("pq_star_length", "|I*| = |I22| = (2Kd_n - 1)a_n");
        let want = (BigInt::from(2) * &k * &d - 1) * &a;
        let (x, y) = (dec.istar.len(), len(IntervalTag::I22));
        if x != want || y != want {
            r.fail(format!("|I*| = {x}, |I22| = {y}, expected {want}"));
        }
        out.push(r);
        Ok(out)
    }
}

/// Distance from `x` to the nearest block of the level with block length
/// `a` and period `p`; zero inside a block.
fn distance_to_blocks(x: &BigInt, a: &BigInt, p: &BigInt) -> BigInt {
    let off = (x - 1i32).mod_floor(p);
    if &off < a {
        return BigInt::zero();
    }
    let after_prev = &off - (a - 1i32);
    let before_next = p - &off;
    if x - &after_prev < BigInt::one() {
        // No block to the left of the first period cell's gap.
        return before_next;
    }
    after_prev.min(before_next)
}

/// Per-level tables for pointwise evaluation and prefix counts.
#[derive(Debug, Clone)]
struct Engine<T> {
    grid: Grid<T>,
    /// `psi([1, a_n])` per level.
    totals: Vec<(T, T)>,
    /// `psi(B_n ∩ [1, a_n d_n])`.
    cell_b: Vec<(T, T)>,
    /// `psi(B_{n-1} ∩ [1, a_n])`.
    prev_at_a: Vec<(T, T)>,
    /// Fill tables for levels `2..`: entry `n - 2` describes how the free
    /// positions of `[1, a_n]` are filled.
    fills: Vec<Fill<T>>,
}

#[derive(Debug, Clone)]
struct Fill<T> {
    /// `(lo, hi, symbol)` in order.
    intervals: Vec<(T, T, Symbol)>,
    /// `|B_{n-1} ∩ [1, lo - 1]|` per interval.
    covered_before: Vec<T>,
    /// `psi` of free positions in the preceding intervals.
    free_psi_before: Vec<(T, T)>,
}

fn add<T: Idx>(a: &(T, T), b: &(T, T)) -> (T, T) {
    (a.0.clone() + b.0.clone(), a.1.clone() + b.1.clone())
}

fn sub<T: Idx>(a: &(T, T), b: &(T, T)) -> (T, T) {
    (a.0.clone() - b.0.clone(), a.1.clone() - b.1.clone())
}

fn unit<T: Idx>(s: Symbol, count: T) -> (T, T) {
    match s {
        Symbol::Zero => (T::zero(), T::zero()),
        Symbol::One => (count, T::zero()),
        Symbol::Two => (T::zero(), count),
    }
}

impl<T: Idx> Engine<T> {
    /// Builds tables for the longest run of levels representable in `T`.
    fn build(decs: &[IntervalDecomposition], grid: Grid<T>) -> Self {
        let mut e = Engine {
            grid,
            totals: Vec::new(),
            cell_b: Vec::new(),
            prev_at_a: Vec::new(),
            fills: Vec::new(),
        };
        let levels = e.grid.levels.len();
        for n in 1..=levels {
            if n >= 2 {
                let Some(fill) = Self::fill_table(&e, &decs[n - 2]) else {
                    e.grid.levels.truncate(n - 1);
                    break;
                };
                e.fills.push(fill);
            }
            let a = e.grid.levels[n - 1].a.clone();
            let per = e.grid.levels[n - 1].period.clone();
            // Tables for level n only need levels < n, plus the fill of n.
            let total = e.prefix_within(n, a.clone());
            e.totals.push(total.clone());
            let prev_a = e.psi_b(n - 1, a.clone());
            let prev_per = e.psi_b(n - 1, per);
            e.prev_at_a.push(prev_a.clone());
            e.cell_b.push(sub(&add(&total, &prev_per), &prev_a));
        }
        e
    }

    fn fill_table(e: &Engine<T>, dec: &IntervalDecomposition) -> Option<Fill<T>> {
        if !dec.is_partition {
            return None;
        }
        let n_prev = dec.level;
        let mut intervals = Vec::with_capacity(7);
        let mut covered_before = Vec::with_capacity(7);
        let mut free_psi_before = Vec::with_capacity(7);
        let mut acc = (T::zero(), T::zero());
        for (tag, sp) in &dec.intervals {
            let lo = T::from_big(&sp.lo.to_biguint()?)?;
            let hi = T::from_big(&sp.hi.to_biguint()?)?;
            let before = e.grid.count_b_prefix(n_prev, lo.clone() - T::one());
            let through = e.grid.count_b_prefix(n_prev, hi.clone());
            let free = hi.clone() - lo.clone() + T::one() - (through - before.clone());
            covered_before.push(before);
            free_psi_before.push(acc.clone());
            acc = add(&acc, &unit(tag.symbol(), free));
            intervals.push((lo, hi, tag.symbol()));
        }
        Some(Fill {
            intervals,
            covered_before,
            free_psi_before,
        })
    }

    fn top(&self) -> usize {
        self.grid.levels.len()
    }

    /// Symbol at `j`, if some available level reaches it.
    fn symbol(&self, j: &T) -> Option<Symbol> {
        for m in 1..=self.top() {
            let lv = &self.grid.levels[m - 1];
            let off = (j.clone() - T::one()).mod_floor(&lv.period);
            if off < lv.a {
                if m == 1 {
                    return Some(Symbol::Zero);
                }
                let r = off + T::one();
                let fill = &self.fills[m - 2];
                let i = fill.intervals.iter().position(|(_, hi, _)| &r <= hi)?;
                return Some(fill.intervals[i].2);
            }
        }
        None
    }

    /// `psi([1, x])` for `x <= a_top`.
    fn prefix(&self, x: &T) -> Option<(T, T)> {
        if x.is_zero() {
            return Some((T::zero(), T::zero()));
        }
        let n = (1..=self.top()).find(|&n| x <= &self.grid.levels[n - 1].a)?;
        Some(self.prefix_within(n, x.clone()))
    }

    /// `psi([1, x])` for `x <= a_n`, with `n` possibly the level under
    /// construction.
    fn prefix_within(&self, n: usize, x: T) -> (T, T) {
        if n == 1 || x.is_zero() {
            return (T::zero(), T::zero());
        }
        let fill = &self.fills[n - 2];
        let i = fill
            .intervals
            .iter()
            .position(|(_, hi, _)| &x <= hi)
            .expect("x <= a_n lies in some interval");
        let (lo, _, sym) = &fill.intervals[i];
        let covered = self.grid.count_b_prefix(n - 1, x.clone()) - fill.covered_before[i].clone();
        let free = x.clone() - lo.clone() + T::one() - covered;
        let free_psi = add(&fill.free_psi_before[i], &unit(*sym, free));
        add(&self.psi_b(n - 1, x), &free_psi)
    }

    /// `psi(B_n ∩ [1, x])`.
    fn psi_b(&self, n: usize, x: T) -> (T, T) {
        if n == 0 || x.is_zero() {
            return (T::zero(), T::zero());
        }
        let lv = &self.grid.levels[n - 1];
        let (q, r) = x.div_rem(&lv.period);
        let mut acc = if q.is_zero() {
            (T::zero(), T::zero())
        } else {
            let c = &self.cell_b[n - 1];
            (c.0.clone() * q.clone(), c.1.clone() * q)
        };
        if r <= lv.a {
            acc = add(&acc, &self.prefix_within(n, r));
        } else {
            let part = sub(&add(&self.totals[n - 1], &self.psi_b(n - 1, r)), &self.prev_at_a[n - 1]);
            acc = add(&acc, &part);
        }
        acc
    }
}

/// The separator sequence, evaluable at any index up to `a_{max_level}`.
#[derive(Debug, Clone)]
pub struct SeparatorSequence {
    params: SeparatorParams,
    decompositions: Vec<IntervalDecomposition>,
    small: Engine<u128>,
    big: Engine<BigUint>,
}

impl SeparatorSequence {
    pub fn new(params: SeparatorParams) -> Result<Self> {
        let s = &params.schedule;
        let decompositions: Vec<_> = (1..s.max_level())
            .map(|n| params.decompose(n))
            .collect::<Result<_>>()?;
        if let Some(bad) = decompositions.iter().find(|d| !d.is_partition) {
            // Levels up to the first broken decomposition remain usable.
            if bad.level == 1 {
                return Err(Error::InvalidParams(format!(
                    "the level-1 intervals do not partition [1, a_2] for K = {}, L = {}",
                    params.k, params.l
                )));
            }
        }
        let small = Engine::build(&decompositions, Grid::small_of(s));
        let big = Engine::build(&decompositions, Grid::big_from_levels(s.levels()));
        Ok(SeparatorSequence {
            params,
            decompositions,
            small,
            big,
        })
    }

    pub fn params(&self) -> &SeparatorParams {
        &self.params
    }

    pub fn decomposition(&self, n: usize) -> Result<&IntervalDecomposition> {
        n.checked_sub(1)
            .and_then(|i| self.decompositions.get(i))
            .ok_or(Error::LevelOutOfRange {
                level: n,
                max_level: self.decompositions.len(),
            })
    }

    /// Highest level whose pattern is fully determined.
    pub fn levels(&self) -> usize {
        self.big.top()
    }

    /// `ω(j)` at an arbitrary index.
    pub fn evaluate(&self, j: &BigUint) -> Result<Symbol> {
        if j.is_zero() {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        if let Some(s) = j.to_u128().and_then(|x| self.small.symbol(&x)) {
            return Ok(s);
        }
        self.big
            .symbol(j)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{j} lies beyond the cached levels")))
    }

    /// `psi([1, x])` at an arbitrary index.
    pub fn psi_prefix(&self, x: &BigUint) -> Result<(BigUint, BigUint)> {
        if let Some(p) = x.to_u128().and_then(|x| self.small.prefix(&x)) {
            return Ok((p.0.to_big(), p.1.to_big()));
        }
        self.big
            .prefix(x)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{x} lies beyond the cached levels")))
    }

    fn prefix_u64(&self, x: u64) -> Result<Psi> {
        let (px, py) = match self.small.prefix(&(x as u128)) {
            Some((a, b)) => (a, b),
            None => {
                let (a, b) = self.psi_prefix(&BigUint::from(x))?;
                (a.to_u128().unwrap(), b.to_u128().unwrap())
            }
        };
        Ok(Psi::new(px as u64, py as u64))
    }

    /// Samples offsets and checks that `I01`, `I02`, `I03` carry identical
    /// content, and that `I12c` matches its translate inside `I22`.
    pub fn check_identical_content(&self, n: usize, samples: u64, seed: u64) -> Result<Report> {
        let mut r = Report::new(
            "content",
            "I01, I02, I03 carry identical symbols, and I12c equals its translate in I22",
        )
        .with_seed(seed);
        let dec = self.decomposition(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zero_len = dec.interval(IntervalTag::I01).len().to_biguint().unwrap();
        let starts: Vec<BigUint> = [IntervalTag::I01, IntervalTag::I02, IntervalTag::I03]
            .iter()
            .map(|t| dec.interval(*t).lo.to_biguint().unwrap())
            .collect();
        let (j1, j2) = self.sweep_windows(n)?;
        let central_len = j1.len();
        for _ in 0..samples {
            let t = random_below(&mut rng, &zero_len);
            let syms: Vec<Symbol> = starts
                .iter()
                .map(|s| self.evaluate(&(s + &t)))
                .collect::<Result<_>>()?;
            if syms[0] != syms[1] || syms[0] != syms[2] {
                r.fail(format!("offset {t}: {:?}", syms));
            }
            let u = random_below(&mut rng, &central_len);
            let (x, y) = (self.evaluate(&(&j1.lo + &u))?, self.evaluate(&(&j2.lo + &u))?);
            if x != y {
                r.fail(format!("central offset {u}: {x} vs {y}"));
            }
        }
        r.stat("samples", samples);
        Ok(r)
    }

    /// `J1 = I12c` and its translate `J2 ⊂ I22` by a multiple of `a_n d_n`.
    pub fn sweep_windows(&self, n: usize) -> Result<(crate::IndexInterval, crate::IndexInterval)> {
        let dec = self.decomposition(n)?;
        let per = BigInt::from(self.params.schedule.period(n).clone());
        let c = dec.central();
        let i22 = dec.interval(IntervalTag::I22);
        let anchor = |sp: &Span| {
            let m: BigInt = (&sp.lo + &sp.hi) / 2;
            let off: BigInt = m.mod_floor(&per);
            m - off
        };
        let shift = anchor(i22) - anchor(c);
        let lo2 = &c.lo + &shift;
        let hi2 = &c.hi + &shift;
        if lo2 < i22.lo || hi2 > i22.hi {
            return Err(Error::Infeasible(format!(
                "translate [{lo2}, {hi2}] of I12c leaves I22 = {i22}"
            )));
        }
        let to = |x: &BigInt| x.to_biguint().unwrap();
        Ok((
            crate::IndexInterval::new(to(&c.lo), to(&c.hi))?,
            crate::IndexInterval::new(to(&lo2), to(&hi2))?,
        ))
    }
}

impl Grid<u128> {
    fn small_of(s: &BlockSchedule) -> Self {
        Grid {
            levels: Grid::big_from_levels(s.levels())
                .levels
                .into_iter()
                .map_while(|l| {
                    Some(crate::blocks::GridLevel {
                        a: l.a.to_u128()?,
                        period: l.period.to_u128()?,
                    })
                })
                .collect(),
        }
    }
}

pub(crate) fn random_below<R: Rng>(rng: &mut R, bound: &BigUint) -> BigUint {
    match bound.to_u64() {
        Some(b) => BigUint::from(rng.gen_range(0..b)),
        None => {
            let bits = bound.bits();
            loop {
                let words: Vec<u32> = (0..bits.div_ceil(32)).map(|_| rng.gen()).collect();
                let x = BigUint::new(words) >> ((bits.div_ceil(32) * 32 - bits) as usize);
                if &x < bound {
                    return x;
                }
            }
        }
    }
}

impl SymbolicSequence for SeparatorSequence {
    fn schedule(&self) -> Option<&BlockSchedule> {
        Some(&self.params.schedule)
    }

    fn horizon(&self) -> Option<u64> {
        None
    }

    fn symbol(&self, j: u64) -> Result<Symbol> {
        if j == 0 {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        match self.small.symbol(&(j as u128)) {
            Some(s) => Ok(s),
            None => self.evaluate(&BigUint::from(j)),
        }
    }

    fn psi_range(&self, lo: u64, hi: u64) -> Result<Psi> {
        if lo == 0 {
            return Err(Error::IndexOutOfRange("0".into()));
        }
        if hi < lo {
            return Ok(Psi::ZERO);
        }
        Ok(self.prefix_u64(hi)?.minus(self.prefix_u64(lo - 1)?))
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> SeparatorParams {
        SeparatorParams::with_pow2(17, 64, 5, DEFAULT_LEVELS, false).unwrap()
    }

    fn toy() -> SeparatorParams {
        SeparatorParams::with_pow2(3, 2, 0, 4, true).unwrap()
    }

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn paper_constants() {
        let p = paper();
        assert_eq!(p.a1(), 3332);
        let (pn, qn) = p.p_q(1);
        assert_eq!(pn, BigInt::from(235_532_417u64));
        assert_eq!(qn, BigInt::from(235_745_663u64));
        let dec = p.decompose(1).unwrap();
        assert_eq!(dec.central().len(), BigInt::from(213_247));
        assert!(dec.is_partition);
    }

    #[test]
    fn paper_mode_rejects_small_constants() {
        assert!(SeparatorParams::with_pow2(16, 64, 5, 3, false).is_err());
        assert!(SeparatorParams::with_pow2(17, 63, 5, 3, false).is_err());
        // delta_inf = 1/16 > 1/32
        assert!(SeparatorParams::with_pow2(17, 64, 4, 3, false).is_err());
        assert!(SeparatorParams::new(17, 64, LevelRule::Constant { value: 64 }, 3, false).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = paper();
        assert_eq!(p.classify(&b(1), 1).unwrap(), IntervalTag::I01);
        assert_eq!(p.classify(&b(235_745_664), 1).unwrap(), IntervalTag::I12);
        let a2 = p.schedule().a(2).clone();
        assert_eq!(p.classify(&a2, 1).unwrap(), IntervalTag::I03);
        assert!(p.classify(&(a2 + 1u32), 1).is_err());
    }

    #[test]
    fn paper_pq_all_pass() {
        let p = paper();
        for n in 1..=3 {
            for r in p.verify_pq(n).unwrap() {
                assert!(r.passed(), "n={n} {r:?}");
            }
        }
    }

    #[test]
    fn toy_pq_reports_failures() {
        let p = toy();
        let reports = p.verify_pq(1).unwrap();
        assert!(reports.iter().any(|r| !r.passed()));
        let pq5 = reports.iter().find(|r| r.check_name == "pq_block_distance").unwrap();
        assert!(!pq5.passed());
        let pq6 = reports.iter().find(|r| r.check_name == "pq_star_length").unwrap();
        assert!(pq6.passed());
    }

    #[test]
    fn evaluate_examples() {
        let s = SeparatorSequence::new(paper()).unwrap();
        assert_eq!(s.evaluate(&b(3333)).unwrap(), Symbol::Zero);
        assert_eq!(s.evaluate(&b(235_532_417)).unwrap(), Symbol::Two);
        for j in [1, 100, 3332] {
            assert_eq!(s.evaluate(&b(j)).unwrap(), Symbol::Zero);
        }
        // Past a_2 the level-2 pattern is periodic with period a_2 d_2.
        let a2d2 = s.params().schedule().period(2).clone();
        assert_eq!(
            s.evaluate(&(&a2d2 + 235_532_417u64)).unwrap(),
            Symbol::Two
        );
    }

    /// Direct fill of the toy sequence on [1, a_3] without any of the
    /// structural shortcuts.
    fn toy_brute(p: &SeparatorParams, upto: usize) -> Vec<Symbol> {
        let s = p.schedule();
        let mut w = alloc::vec![Symbol::Zero; upto];
        for n in 1..s.max_level() {
            let a_next = s.a_u64(n + 1).unwrap() as usize;
            let dec = p.decompose(n).unwrap();
            for j in 1..=a_next.min(upto) {
                let covered = (1..=n).any(|k| s.in_level_u64(j as u64, k));
                if covered {
                    // Copy from the level that fixed it.
                    let k = (1..=n).find(|&k| s.in_level_u64(j as u64, k)).unwrap();
                    let per = s.period_u64(k).unwrap() as usize;
                    w[j - 1] = w[(j - 1) % per];
                } else {
                    let tag = dec
                        .intervals
                        .iter()
                        .find(|(_, sp)| sp.contains(&BigInt::from(j)))
                        .unwrap()
                        .0;
                    w[j - 1] = tag.symbol();
                }
            }
            if a_next >= upto {
                break;
            }
        }
        w
    }

    #[test]
    fn toy_evaluation_matches_direct_fill() {
        let p = toy();
        let s = SeparatorSequence::new(p.clone()).unwrap();
        let a3 = p.schedule().a_u64(3).unwrap() as usize;
        let brute = toy_brute(&p, a3);
        let mut acc = Psi::ZERO;
        for j in 1..=a3 {
            let got = s.symbol(j as u64).unwrap();
            assert_eq!(got, brute[j - 1], "j={j}");
            acc.push(got);
            if j % 97 == 0 || j == a3 {
                assert_eq!(s.psi_range(1, j as u64).unwrap(), acc, "prefix {j}");
            }
        }
    }

    #[test]
    fn big_and_small_engines_agree() {
        let s = SeparatorSequence::new(paper()).unwrap();
        let a3 = s.params().schedule().a(3).clone();
        for x in [b(1), b(3332), b(235_532_417), b(710_545_668), a3.clone(), &a3 - 12345u32] {
            let small = s.small.prefix(&x.to_u128().unwrap()).unwrap();
            let big = s.big.prefix(&x).unwrap();
            assert_eq!((small.0.to_big(), small.1.to_big()), big);
        }
    }

    #[test]
    fn paper_prefix_matches_streaming() {
        let s = SeparatorSequence::new(paper()).unwrap();
        let a2 = s.params().schedule().a_u64(2).unwrap();
        let per2 = s.params().schedule().period_u64(2).unwrap();
        for centre in [3332, 235_532_417, a2 - 700, per2 + 235_745_663, 3 * per2 - 5] {
            let lo = centre - 1500;
            let mut acc = Psi::ZERO;
            for j in lo..=centre + 1500 {
                acc.push(s.symbol(j).unwrap());
                if (j - lo) % 211 == 0 {
                    assert_eq!(s.psi_range(lo, j).unwrap(), acc, "[{lo}, {j}]");
                }
            }
        }
    }

    #[test]
    fn sweep_windows_translate_by_whole_periods() {
        let s = SeparatorSequence::new(paper()).unwrap();
        let (j1, j2) = s.sweep_windows(1).unwrap();
        assert_eq!(j1.len(), j2.len());
        let per = s.params().schedule().period(1);
        assert!(((&j2.lo - &j1.lo) % per).is_zero());
        let r = s.check_identical_content(1, 500, 7).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
