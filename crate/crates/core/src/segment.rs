//! The line-segment construction.
//!
//! For a direction `v` in the admissible region `V`, the generator fills each
//! level greedily so that the projected displacement
//! `D(l, j) = <psi([l, j]), v/|v|> - (j - l + 1)|v|` stays bounded. Window
//! averages then concentrate on the line `<x, v/|v|> = |v|`, while the symbol
//! used for free positions alternates between `1` and `2` from level to
//! level, which spreads the averages along that line.
//!
//! All arithmetic is exact. `D` is irrational in general, but `D * |v|` is a
//! rational combination of `v_x`, `v_y` and `|v|^2`; after multiplying by a
//! common denominator `Q` every increment and every bound becomes an integer.
//! Bounds that carry a bare `|v|` term are decided by squaring.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::blocks::{BlockSchedule, LevelRule};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::sequence::{Materialized, SymbolicSequence};
use crate::symbol::{Psi, Symbol};

/// Levels cached by [`derive_params`] unless asked otherwise.
pub const DEFAULT_LEVELS: usize = 6;

/// `D * |v| * Q`, an exact integer multiple of the displacement.
pub type ScaledDisplacement = i128;

/// Constants of the construction for one direction `v`.
#[derive(Debug, Clone)]
pub struct SegmentParams {
    vx: BigRational,
    vy: BigRational,
    norm_sq: BigRational,
    t: i64,
    a1: u64,
    schedule: BlockSchedule,
    scale: BigInt,
    inc: [i128; 3],
    m_scaled: i128,
    norm_scaled_sq: i128,
    delta: BigRational,
}

/// Derives the constants for `v`, rejecting directions outside `V`.
///
/// `t` is the smallest integer with `2^-t <= |v| / (10 max(alpha, beta))` and
/// `a1` the smallest integer with `a1 >= 2M/|v| + 1`, unless `a1_override`
/// asks for a larger one.
pub fn derive_params(
    v: (BigRational, BigRational),
    a1_override: Option<u64>,
    max_level: usize,
) -> Result<SegmentParams> {
    let (vx, vy) = v;
    let zero = BigRational::zero();
    let one = BigRational::one();
    if vx <= zero || vy <= zero || &vx + &vy >= one {
        return Err(Error::InvalidParams(format!(
            "v = ({vx}, {vy}) is not in the open simplex"
        )));
    }
    let norm_sq = &vx * &vx + &vy * &vy;
    let vmin = (&vx).min(&vy).clone();
    let vmax = (&vx).max(&vy).clone();
    // |v| <= min(alpha, beta)  <=>  |v|^2 <= min(v_x, v_y)
    if norm_sq > vmin {
        return Err(Error::InvalidParams(format!(
            "v = ({vx}, {vy}) violates |v| <= min(alpha, beta): |v|^2 = {norm_sq} > {vmin}"
        )));
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let delta = &norm_sq / (&ten * &vmax);
    let mut t = 0i64;
    while BigRational::new(BigInt::one(), BigInt::one() << (t as usize)) > delta {
        t += 1;
    }
    // M * |v| = |v|^2 + max(v_x, v_y)
    let m_times_norm = &norm_sq + &vmax;
    let two = BigRational::from_integer(BigInt::from(2));
    let a1_bound = &two * &m_times_norm / &norm_sq + &one;
    let a1_min = a1_bound
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidParams("a1 does not fit in 64 bits".into()))?;
    let a1 = match a1_override {
        Some(o) if o < a1_min => {
            return Err(Error::InvalidParams(format!(
                "a1 = {o} violates a1 >= 2M/|v| + 1 = {a1_bound}"
            )))
        }
        Some(o) => o,
        None => a1_min,
    };
    let schedule = BlockSchedule::new(
        a1,
        LevelRule::Constant { value: 1 },
        LevelRule::Pow2 { offset: t },
        max_level,
    )?;

    let scale = [&vx, &vy, &norm_sq]
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let q = BigRational::from_integer(scale.clone());
    let to_i128 = |r: BigRational| -> Result<i128> {
        debug_assert!(r.is_integer());
        r.to_integer()
            .to_i128()
            .filter(|x| x.unsigned_abs() < 1u128 << 100)
            .ok_or_else(|| Error::InvalidParams("denominators of v are too large".into()))
    };
    let inc = [
        to_i128(-(&norm_sq * &q))?,
        to_i128((&vx - &norm_sq) * &q)?,
        to_i128((&vy - &norm_sq) * &q)?,
    ];
    let m_scaled = to_i128(&m_times_norm * &q)?;
    let norm_scaled_sq = to_i128(&norm_sq * &q * &q)?;
    Ok(SegmentParams {
        vx,
        vy,
        norm_sq,
        t,
        a1,
        schedule,
        scale,
        inc,
        m_scaled,
        norm_scaled_sq,
        delta,
    })
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

impl SegmentParams {
    pub fn v(&self) -> (&BigRational, &BigRational) {
        (&self.vx, &self.vy)
    }

    pub fn norm_sq(&self) -> &BigRational {
        &self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(ratio_f64(&self.norm_sq))
    }

    /// `<v_1, v/|v|>`.
    pub fn alpha(&self) -> f64 {
        ratio_f64(&self.vx) / self.norm()
    }

    /// `<v_2, v/|v|>`.
    pub fn beta(&self) -> f64 {
        ratio_f64(&self.vy) / self.norm()
    }

    /// `M = |v| + max(alpha, beta)`.
    pub fn m(&self) -> f64 {
        self.norm() + self.alpha().max(self.beta())
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn a1(&self) -> u64 {
        self.a1
    }

    /// Run-up length `K = a1 - 1`.
    pub fn k(&self) -> u64 {
        self.a1 - 1
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    /// `delta = |v| / (10 max(alpha, beta))`, exact.
    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    /// The common denominator `Q`.
    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// Scaled increment of `D(1, ·)` when `s` is appended.
    pub fn inc(&self, s: Symbol) -> ScaledDisplacement {
        self.inc[s.index()]
    }

    /// `M` in scaled units.
    pub fn m_scaled(&self) -> ScaledDisplacement {
        self.m_scaled
    }

    /// Converts a scaled displacement back to `D`.
    pub fn to_f64(&self, d: ScaledDisplacement) -> f64 {
        d as f64 / (self.scale.to_f64().unwrap_or(f64::NAN) * self.norm())
    }

    /// `D` of a word with summed displacement `psi` and length `len`.
    pub fn displacement_of(&self, psi: Psi, len: u64) -> ScaledDisplacement {
        let zeros = len - psi.x - psi.y;
        psi.x as i128 * self.inc[1] + psi.y as i128 * self.inc[2] + zeros as i128 * self.inc[0]
    }

    /// Decides `|D| <= c M` for a scaled `|D|`.
    pub fn within_m(&self, abs_d: ScaledDisplacement, c: u64) -> bool {
        abs_d <= c as i128 * self.m_scaled
    }

    /// Whether `|D| <= 2nM + 1` for a scaled `|D|`: the bound `M` is scaled
    /// by `|v| Q`, and `1` becomes `|v| Q`, handled by squaring.
    pub fn within_pis_bound(&self, abs_d: ScaledDisplacement, n: u64) -> bool {
        let excess = abs_d - 2 * n as i128 * self.m_scaled;
        if excess <= 0 {
            return true;
        }
        // 1 * |v| * Q in scaled units: excess <= |v| Q  <=>  excess^2 <= |v|^2 Q^2
        let lhs = BigInt::from(excess) * BigInt::from(excess);
        lhs <= BigInt::from(self.norm_scaled_sq)
    }
}

/// Running state of the greedy generator: `D(1, position)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DisplacementState {
    pub position: u64,
    pub value: ScaledDisplacement,
}

impl DisplacementState {
    pub fn push(&mut self, params: &SegmentParams, s: Symbol) {
        self.position += 1;
        self.value += params.inc(s);
    }
}

/// A generated prefix of the segment sequence.
#[derive(Debug, Clone)]
pub struct SegmentSequence {
    params: SegmentParams,
    prefix: Materialized,
    /// `D(1, a_n)` for every completed level.
    level_ends: Vec<ScaledDisplacement>,
}

impl SegmentSequence {
    /// Generates `ω(1..=horizon)`.
    pub fn generate(params: &SegmentParams, horizon: u64) -> Result<Self> {
        Generator::new(params).run(horizon)
    }

    pub fn params(&self) -> &SegmentParams {
        &self.params
    }

    pub fn sequence(&self) -> &Materialized {
        &self.prefix
    }

    /// `D(1, a_n)` for each completed level.
    pub fn level_ends(&self) -> &[ScaledDisplacement] {
        &self.level_ends
    }

    /// Number of complete levels in the prefix.
    pub fn complete_levels(&self) -> usize {
        self.level_ends.len()
    }

    /// The pattern on `[1, a_n]`.
    pub fn level_pattern(&self, n: usize) -> Option<&[Symbol]> {
        let a = self.params.schedule.a_u64(n)?;
        self.prefix.symbols().get(..a as usize)
    }

    /// `D(l, j)`; zero for the empty range `l = j + 1`.
    pub fn displacement(&self, l: u64, j: u64) -> Result<ScaledDisplacement> {
        displacement(&self.params, &self.prefix, l, j)
    }
}

impl SymbolicSequence for SegmentSequence {
    fn schedule(&self) -> Option<&crate::BlockSchedule> {
        Some(&self.params.schedule)
    }

    fn horizon(&self) -> Option<u64> {
        self.prefix.horizon()
    }

    fn symbol(&self, j: u64) -> Result<Symbol> {
        self.prefix.symbol(j)
    }

    fn psi_range(&self, lo: u64, hi: u64) -> Result<Psi> {
        self.prefix.psi_range(lo, hi)
    }
}

/// `D(l, j)` of any sequence, with the segment's increments.
pub fn displacement<S: SymbolicSequence + ?Sized>(
    params: &SegmentParams,
    seq: &S,
    l: u64,
    j: u64,
) -> Result<ScaledDisplacement> {
    if l == j + 1 {
        return Ok(0);
    }
    if l > j + 1 || l == 0 {
        return Err(Error::InvalidParams(format!("range [{l}, {j}] is not evaluable")));
    }
    let psi = seq.psi_range(l, j)?;
    Ok(params.displacement_of(psi, j - l + 1))
}

struct Generator<'a> {
    params: &'a SegmentParams,
    symbols: Vec<Symbol>,
    state: DisplacementState,
    level_ends: Vec<ScaledDisplacement>,
}

impl<'a> Generator<'a> {
    fn new(params: &'a SegmentParams) -> Self {
        Generator {
            params,
            symbols: Vec::new(),
            state: DisplacementState::default(),
            level_ends: Vec::new(),
        }
    }

    fn run(mut self, horizon: u64) -> Result<SegmentSequence> {
        if horizon > crate::DEFAULT_MATERIALIZATION_CAP.max(horizon.min(1 << 27)) {
            return Err(Error::BudgetExceeded { budget: 1 << 27 });
        }
        let sched = &self.params.schedule;
        self.symbols.reserve(horizon as usize);
        let mut n = 1;
        while (self.symbols.len() as u64) < horizon {
            if n > sched.max_level() {
                return Err(Error::LevelOutOfRange {
                    level: n,
                    max_level: sched.max_level(),
                });
            }
            let a = sched
                .a_u64(n)
                .ok_or_else(|| Error::InvalidParams(format!("a_{n} does not fit in 64 bits")))?;
            let end = a.min(horizon);
            while (self.symbols.len() as u64) < end {
                self.step(n)?;
            }
            if self.symbols.len() as u64 == a {
                let d = self.state.value;
                if !(0..=self.params.m_scaled).contains(&d) {
                    return Err(Error::Infeasible(format!(
                        "D(1, a_{n}) = {} left [0, M]",
                        self.params.to_f64(d)
                    )));
                }
                self.level_ends.push(d);
                n += 1;
            }
        }
        let schedule = self.params.schedule.clone();
        Ok(SegmentSequence {
            params: self.params.clone(),
            prefix: Materialized::new(Some(schedule), self.symbols),
            level_ends: self.level_ends,
        })
    }

    fn push(&mut self, s: Symbol) {
        self.symbols.push(s);
        self.state.push(self.params, s);
    }

    /// Fixes `ω(j)` for `j = len + 1` while building level `n`.
    fn step(&mut self, n: usize) -> Result<()> {
        let p = self.params;
        let sched = &p.schedule;
        let j = self.symbols.len() as u64 + 1;
        // Inherited from a lower-level block: copy from the initial block.
        for k in (1..n).rev() {
            let period = sched.period_u64(k).unwrap();
            let a = sched.a_u64(k).unwrap();
            if (j - 1) % period < a {
                let src = (j - 1) % period;
                let s = self.symbols[src as usize];
                self.push(s);
                return Ok(());
            }
        }
        let iota = if n % 2 == 1 { Symbol::One } else { Symbol::Two };
        let kk = p.k();
        // Next start of a lower-level block after j.
        let mut next: Option<(u64, usize)> = None;
        for k in 1..n {
            let period = sched.period_u64(k).unwrap();
            let r = j % period;
            let s = if r == 0 { j + 1 } else { j + 1 + (period - r) };
            match next {
                Some((best, _)) if s > best => {}
                // Equal starts: keep the higher (maximal) level.
                _ => next = Some((s, k)),
            }
        }
        let m = p.m_scaled;
        match next {
            Some((start, k)) if start <= j + kk => {
                // Run-up [start - K, start - 1] before a maximal block of level k.
                let end_block = self.level_ends[k - 1];
                let remaining = start - 1 - j;
                let lo = -end_block;
                let hi = m - end_block;
                let d0 = self.state.value + p.inc(Symbol::Zero);
                let di = self.state.value + p.inc(iota);
                let s = if runup_feasible(p, iota, d0, remaining, lo, hi) {
                    Symbol::Zero
                } else if runup_feasible(p, iota, di, remaining, lo, hi) {
                    iota
                } else {
                    return Err(Error::Infeasible(format!(
                        "run-up at position {j} of level {n} cannot reach the window before the block at {start}"
                    )));
                };
                self.push(s);
                debug_assert!((-m..=m).contains(&self.state.value));
            }
            _ => {
                let d0 = self.state.value + p.inc(Symbol::Zero);
                let di = self.state.value + p.inc(iota);
                let s = if (0..=m).contains(&d0) {
                    Symbol::Zero
                } else if (0..=m).contains(&di) {
                    iota
                } else {
                    return Err(Error::Infeasible(format!(
                        "no symbol keeps D(1, {j}) in [0, M] at level {n}"
                    )));
                };
                self.push(s);
            }
        }
        Ok(())
    }
}

/// Whether, from `D = start` (already in effect after the current step),
/// `remaining` further choices of `0` or `iota` can keep `D` in `[-M, M]`
/// and end in `[lo, hi]`.
fn runup_feasible(
    p: &SegmentParams,
    iota: Symbol,
    start: ScaledDisplacement,
    remaining: u64,
    lo: ScaledDisplacement,
    hi: ScaledDisplacement,
) -> bool {
    let m = p.m_scaled;
    let (down, up) = (p.inc(Symbol::Zero), p.inc(iota));
    let value = |i: u64, u: u64| start + u as i128 * up + (i - u) as i128 * down;
    if !(-m..=m).contains(&start) {
        return false;
    }
    let r = remaining as usize;
    // good[u] after i steps with u iotas, computed backwards from i = r.
    let mut good: Vec<bool> = (0..=r)
        .map(|u| {
            let v = value(remaining, u as u64);
            (-m..=m).contains(&v) && (lo..=hi).contains(&v)
        })
        .collect();
    for i in (0..r).rev() {
        let next = core::mem::take(&mut good);
        good = (0..=i)
            .map(|u| {
                let v = value(i as u64, u as u64);
                (-m..=m).contains(&v) && (next[u] || next[u + 1])
            })
            .collect();
    }
    good[0]
}

/// Checks `|D(i, j)| <= 2nM + 1` for every pair `lo <= i < j <= hi` with
/// `j - i <= a_n`.
///
/// The scan is exhaustive: for each `j` the extreme values of `D(1, i - 1)`
/// over the admissible `i` come from monotone deques, so the cost is linear
/// in the range.
pub fn check_pis<S: SymbolicSequence + ?Sized>(
    params: &SegmentParams,
    seq: &S,
    n: usize,
    lo: u64,
    hi: u64,
) -> Result<Report> {
    let mut r = Report::new(
        "pis",
        "|D(i, j)| <= 2nM + 1 whenever 0 < j - i <= a_n",
    );
    seq.check_range(lo, hi)?;
    let w = params
        .schedule
        .a_u64(n)
        .ok_or_else(|| Error::InvalidParams(format!("a_{n} does not fit in 64 bits")))?;
    // e[x] = D(lo, lo - 1 + x), e[0] = 0
    let len = (hi - lo + 1) as usize;
    let mut e = vec![0i128; len + 1];
    for x in 1..=len {
        e[x] = e[x - 1] + params.inc(seq.symbol(lo - 1 + x as u64)?);
    }
    let mut maxq: alloc::collections::VecDeque<usize> = Default::default();
    let mut minq: alloc::collections::VecDeque<usize> = Default::default();
    let mut worst: (i128, u64, u64) = (0, 0, 0);
    let mut pairs: u128 = 0;
    // D(i, j) = e[j'] - e[i' - 1] with j' - i' in [1, w].
    for jx in 2..=len {
        let add = jx - 2;
        while maxq.back().is_some_and(|&b| e[b] <= e[add]) {
            maxq.pop_back();
        }
        maxq.push_back(add);
        while minq.back().is_some_and(|&b| e[b] >= e[add]) {
            minq.pop_back();
        }
        minq.push_back(add);
        let first = jx.saturating_sub(w as usize + 1);
        while maxq.front().is_some_and(|&f| f < first) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&f| f < first) {
            minq.pop_front();
        }
        pairs += (add - first + 1) as u128;
        let (mx, mn) = (maxq[0], minq[0]);
        for (d, ix) in [(e[jx] - e[mn], mn), (e[mx] - e[jx], mx)] {
            if d > worst.0 {
                worst = (d, lo + ix as u64, lo - 1 + jx as u64);
            }
        }
    }
    r.stat("n", n);
    r.stat("window", w);
    r.stat("pairs", pairs);
    r.stat("max_abs_d", params.to_f64(worst.0));
    r.stat("bound", 2.0 * n as f64 * params.m() + 1.0);
    r.stat("argmax", format!("({}, {})", worst.1, worst.2));
    if !params.within_pis_bound(worst.0, n as u64) {
        r.fail(format!(
            "|D({}, {})| = {} exceeds 2nM + 1",
            worst.1,
            worst.2,
            params.to_f64(worst.0)
        ));
    }
    Ok(r)
}

/// Checks `|D(1, j)| <= M depth(j)` for every `j <= hi`.
pub fn check_depth_bound<S: SymbolicSequence + ?Sized>(
    params: &SegmentParams,
    seq: &S,
    hi: u64,
) -> Result<Report> {
    let mut r = Report::new("depth", "|D(1, j)| <= M depth(j)");
    seq.check_range(1, hi)?;
    let mut d = 0i128;
    let mut max_depth = 0;
    for j in 1..=hi {
        d += params.inc(seq.symbol(j)?);
        let depth = params.schedule.depth(&BigUint::from(j))?;
        max_depth = max_depth.max(depth);
        if !params.within_m(d.abs(), depth as u64) {
            r.fail(format!(
                "j = {j}: |D(1, j)| = {} > M * {depth}",
                params.to_f64(d.abs())
            ));
        }
    }
    r.stat("positions", hi);
    r.stat("max_depth", max_depth);
    Ok(r)
}

/// Checks that every window of length `a_n` inside `[1, hi]` has
/// `|<rho(J), v/|v|> - |v|| <= (2nM + 1) / a_n`.
pub fn check_window_geometry<S: SymbolicSequence + ?Sized>(
    params: &SegmentParams,
    seq: &S,
    n: usize,
    hi: u64,
) -> Result<Report> {
    let mut r = Report::new(
        "geometry",
        "windows of length a_n lie within (2nM + 1)/a_n of the line <x, v/|v|> = |v|",
    );
    let w = params
        .schedule
        .a_u64(n)
        .ok_or_else(|| Error::InvalidParams(format!("a_{n} does not fit in 64 bits")))?;
    seq.check_range(1, hi)?;
    let mut worst = 0i128;
    let mut windows = 0u64;
    if hi >= w {
        for lo in 1..=hi - w + 1 {
            let d = displacement(params, seq, lo, lo + w - 1)?.abs();
            windows += 1;
            worst = worst.max(d);
            if !params.within_pis_bound(d, n as u64) {
                r.fail(format!("window at {lo}: |D| = {}", params.to_f64(d)));
            }
        }
    }
    r.stat("windows", windows);
    r.stat("max_abs_offset", params.to_f64(worst) / w as f64);
    r.stat("bound", (2.0 * n as f64 * params.m() + 1.0) / w as f64);
    Ok(r)
}

/// Exact frequencies of `1` and `2` on `[1, a_n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointFrequencies {
    pub level: usize,
    pub freq1: BigRational,
    pub freq2: BigRational,
    /// The free-position symbol of this level has frequency above `9 delta`.
    pub expectation_met: bool,
}

pub fn endpoint_frequencies<S: SymbolicSequence + ?Sized>(
    params: &SegmentParams,
    seq: &S,
    n: usize,
) -> Result<EndpointFrequencies> {
    let a = params
        .schedule
        .a_u64(n)
        .ok_or_else(|| Error::InvalidParams(format!("a_{n} does not fit in 64 bits")))?;
    let psi = seq.psi_range(1, a)?;
    let den = BigInt::from(a);
    let freq1 = BigRational::new(BigInt::from(psi.x), den.clone());
    let freq2 = BigRational::new(BigInt::from(psi.y), den);
    let nine_delta = BigRational::from_integer(BigInt::from(9)) * &params.delta;
    let main = if n % 2 == 1 { &freq1 } else { &freq2 };
    let expectation_met = main > &nine_delta;
    Ok(EndpointFrequencies {
        level: n,
        freq1,
        freq2,
        expectation_met,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn quarter() -> SegmentParams {
        derive_params((q(1, 4), q(1, 4)), None, DEFAULT_LEVELS).unwrap()
    }

    #[test]
    fn derived_constants_for_quarter() {
        let p = quarter();
        let s2 = core::f64::consts::SQRT_2;
        assert!((p.alpha() - s2 / 2.0).abs() < 1e-12);
        assert!((p.beta() - s2 / 2.0).abs() < 1e-12);
        assert!((p.norm() - s2 / 4.0).abs() < 1e-12);
        assert!((p.m() - 3.0 * s2 / 4.0).abs() < 1e-12);
        assert_eq!(p.t(), 5);
        assert_eq!(p.a1(), 7);
        assert_eq!(p.k(), 6);
        assert_eq!(p.delta(), &q(1, 20));
        // Q = 8: increments -|v|, alpha - |v|, beta - |v| become -1, 1, 1.
        assert_eq!(p.inc, [-1, 1, 1]);
        assert_eq!(p.m_scaled, 3);
    }

    #[test]
    fn rejects_directions_outside_v() {
        let e = derive_params((q(9, 10), q(1, 20)), None, 3);
        assert!(matches!(e, Err(Error::InvalidParams(_))));
        assert!(derive_params((q(0, 1), q(1, 2)), None, 3).is_err());
        assert!(derive_params((q(1, 2), q(1, 2)), None, 3).is_err());
    }

    #[test]
    fn override_only_raises_a1() {
        let p = derive_params((q(1, 4), q(1, 4)), Some(20), 3).unwrap();
        assert_eq!((p.a1(), p.k(), p.t()), (20, 19, 5));
        assert!(derive_params((q(1, 4), q(1, 4)), Some(5), 3).is_err());
    }

    #[test]
    fn level_one_starts_alternating() {
        let p = quarter();
        let s = SegmentSequence::generate(&p, 7).unwrap();
        let digits: Vec<u8> = s.sequence().symbols().iter().map(|s| *s as u8).collect();
        assert_eq!(&digits[..4], &[1, 0, 1, 0]);
        assert_eq!(s.level_pattern(1).unwrap().len(), 7);
        // Level 1 only places 0 and 1.
        let f = endpoint_frequencies(&p, s.sequence(), 1).unwrap();
        assert_eq!(f.freq2, BigRational::zero());
        assert!(f.expectation_met);
    }

    #[test]
    fn displacement_examples() {
        let p = quarter();
        let zero = Materialized::new(None, vec![Symbol::Zero]);
        let one = Materialized::new(None, vec![Symbol::One]);
        assert!((p.to_f64(displacement(&p, &zero, 1, 1).unwrap()) + p.norm()).abs() < 1e-12);
        let d1 = p.to_f64(displacement(&p, &one, 1, 1).unwrap());
        assert!((d1 - core::f64::consts::SQRT_2 / 4.0).abs() < 1e-12);
        assert_eq!(displacement(&p, &one, 2, 1).unwrap(), 0);
    }

    #[test]
    fn level_two_inherits_level_one_blocks() {
        let p = quarter();
        let a2 = p.schedule().a_u64(2).unwrap();
        let s = SegmentSequence::generate(&p, a2).unwrap();
        let sym = s.sequence().symbols();
        let a1 = 7usize;
        for j in 1..=a2 {
            if p.schedule().in_level_u64(j, 1) {
                let src = ((j - 1) % p.schedule().period_u64(1).unwrap()) as usize;
                assert_eq!(sym[j as usize - 1], sym[src]);
                assert!(src < a1);
            }
        }
        assert_eq!(s.complete_levels(), 2);
        for &e in s.level_ends() {
            assert!((0..=p.m_scaled()).contains(&e));
        }
    }

    #[test]
    fn within_decides_sqrt_bounds_exactly() {
        let p = quarter();
        // 2M + 1 in scaled units is 6 + |v| Q = 6 + 2 sqrt 2 ~ 8.83.
        assert!(p.within_pis_bound(8, 1));
        assert!(!p.within_pis_bound(9, 1));
        assert!(p.within_m(3, 1));
        assert!(!p.within_m(4, 1));
    }

    #[test]
    fn runup_greedy_prefers_zero() {
        let p = quarter();
        // From D = 1 with 2 steps left and target [-1, 2], zero is fine.
        assert!(runup_feasible(&p, Symbol::One, 0, 2, -1, 2));
        // Target unreachable: needs +5 in 2 steps.
        assert!(!runup_feasible(&p, Symbol::One, 0, 2, 5, 6));
    }

    #[test]
    fn pis_deque_matches_brute_force() {
        let p = quarter();
        let s = SegmentSequence::generate(&p, 455).unwrap();
        for n in 1..=2 {
            let w = p.schedule().a_u64(n).unwrap();
            let rep = check_pis(&p, s.sequence(), n, 1, 455).unwrap();
            let mut worst = 0i128;
            for i in 1..=455u64 {
                for j in i + 1..=(i + w).min(455) {
                    worst = worst.max(displacement(&p, s.sequence(), i, j).unwrap().abs());
                }
            }
            let reported: f64 = rep.statistics["max_abs_d"].parse().unwrap();
            assert!((reported - p.to_f64(worst)).abs() < 1e-9, "n={n}");
            assert!(rep.passed());
        }
    }

    #[test]
    fn all_zero_sequence_fails_pis() {
        let p = quarter();
        let zeros = Materialized::new(None, vec![Symbol::Zero; 455]);
        // Windows of length a_1 are still short enough to pass; at a_2 the
        // linear drift j|v| breaks the bound.
        assert!(check_pis(&p, &zeros, 1, 1, 455).unwrap().passed());
        assert!(!check_pis(&p, &zeros, 2, 1, 455).unwrap().passed());
        let f = endpoint_frequencies(&p, &zeros, 1).unwrap();
        assert_eq!((f.freq1.clone(), f.freq2.clone()), (BigRational::zero(), BigRational::zero()));
        assert!(!f.expectation_met);
    }
}
