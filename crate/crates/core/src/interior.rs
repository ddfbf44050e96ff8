//! The interior-filling construction.
//!
//! Each level `[1, a_n]` is filled so that its average displacement equals a
//! prescribed grid vector `rho_n` in the shrunken simplex
//! `Δ_δ = {(s, t) : s > δ, t > δ, s + t < 1 - δ}`, with `δ = δ_∞`. Targets
//! walk a low-discrepancy sequence through `Δ_δ`, so the targets of all
//! levels together are dense in it.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::blocks::{BlockSchedule, LevelRule};
use crate::error::{Error, Result};
use crate::sequence::{Materialized, SymbolicSequence};
use crate::symbol::{Psi, Symbol};
use crate::DEFAULT_MATERIALIZATION_CAP;

/// The plastic number, whose inverse powers give the two-dimensional
/// generalized golden-ratio sequence.
const PLASTIC: f64 = 1.324_717_957_244_746;

/// Schedule with `b_n = 1` plus the state of the target enumeration.
#[derive(Debug, Clone)]
pub struct InteriorParams {
    schedule: BlockSchedule,
    /// `δ_∞` as `num / den`.
    delta: (u64, u64),
    target_seed: u64,
}

impl InteriorParams {
    pub fn new(a1: u64, d: LevelRule, levels: usize, target_seed: u64) -> Result<Self> {
        let schedule = BlockSchedule::new(a1, LevelRule::Constant { value: 1 }, d, levels)?;
        let delta = schedule
            .delta_infinity()
            .ok_or_else(|| Error::InvalidParams("delta_inf diverges; it must be below 1/10".into()))?;
        if delta >= BigRational::new(BigInt::one(), BigInt::from(10)) {
            return Err(Error::InvalidParams(alloc::format!(
                "delta_inf = {delta} violates delta_inf < 1/10"
            )));
        }
        let num = delta.numer().to_u64();
        let den = delta.denom().to_u64();
        let (Some(num), Some(den)) = (num, den) else {
            return Err(Error::InvalidParams("delta_inf has an oversized denominator".into()));
        };
        Ok(InteriorParams {
            schedule,
            delta: (num, den),
            target_seed,
        })
    }

    /// `d_n = 2^(n + dexp)`.
    pub fn with_pow2(a1: u64, dexp: i64, levels: usize, target_seed: u64) -> Result<Self> {
        Self::new(a1, LevelRule::Pow2 { offset: dexp }, levels, target_seed)
    }

    pub fn schedule(&self) -> &BlockSchedule {
        &self.schedule
    }

    pub fn delta(&self) -> BigRational {
        BigRational::new(BigInt::from(self.delta.0), BigInt::from(self.delta.1))
    }

    pub fn target_seed(&self) -> u64 {
        self.target_seed
    }

    fn delta_f64(&self) -> f64 {
        self.delta.0 as f64 / self.delta.1 as f64
    }

    /// Whether `(c1 / a, c2 / a)` lies strictly inside `Δ_δ`.
    pub fn in_delta_region(&self, c1: u64, c2: u64, a: u64) -> bool {
        let (p, q) = (self.delta.0 as u128, self.delta.1 as u128);
        let (c1, c2, a) = (c1 as u128, c2 as u128, a as u128);
        c1 * q > p * a && c2 * q > p * a && (c1 + c2) * q < (q - p) * a
    }

    /// The `k`-th point of the low-discrepancy sequence in the unit square.
    fn kronecker(k: u64) -> (f64, f64) {
        let g1 = 1.0 / PLASTIC;
        let g2 = g1 * g1;
        let k = k as f64;
        let frac = |x: f64| x - libm::floor(x);
        (frac(0.5 + k * g1), frac(0.5 + k * g2))
    }
}

/// The cursor of the target enumeration; each accepted point advances it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetCursor(pub u64);

/// The average prescribed for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    pub level: usize,
    /// `(c1 / a_n, c2 / a_n)`.
    pub rho: (BigRational, BigRational),
    /// `(c0, c1, c2)`, summing to `a_n`.
    pub counts: [u64; 3],
    /// The low-discrepancy point the target was derived from.
    pub requested: (f64, f64),
}

/// How a requested point was moved before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustmentKind {
    /// Rounding to the `1/a_n` grid left `Δ_δ`; moved to the nearest grid
    /// point inside it.
    Snap,
    /// Counts fixed by earlier levels made the grid point unreachable.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjustment {
    pub level: usize,
    pub kind: AdjustmentKind,
    /// Counts `(c0, c1, c2)` before and after.
    pub from: [u64; 3],
    pub to: [u64; 3],
}

/// Nearest grid point of `(1/a)ℤ²` strictly inside `Δ_δ`, by Euclidean
/// distance to `point`. Returns the counts and whether plain rounding had to
/// be corrected.
pub fn snap_to_grid(params: &InteriorParams, point: (f64, f64), a: u64) -> Result<([u64; 3], bool)> {
    let af = a as f64;
    let r1 = libm::round(point.0 * af).clamp(0.0, af) as u64;
    let r2 = libm::round(point.1 * af).clamp(0.0, af) as u64;
    if r1 + r2 <= a && params.in_delta_region(r1, r2, a) {
        return Ok(([a - r1 - r2, r1, r2], false));
    }
    let dist = |c1: u64, c2: u64| {
        let (dx, dy) = (c1 as f64 - point.0 * af, c2 as f64 - point.1 * af);
        dx * dx + dy * dy
    };
    let mut best: Option<(f64, u64, u64)> = None;
    // A strip around the rounded point suffices unless the grid is coarse.
    let reach = 4.max(a / 4);
    for c1 in r1.saturating_sub(reach)..=(r1 + reach).min(a) {
        for c2 in r2.saturating_sub(reach)..=(r2 + reach).min(a - c1) {
            if params.in_delta_region(c1, c2, a) {
                let d = dist(c1, c2);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, c1, c2));
                }
            }
        }
    }
    match best {
        Some((_, c1, c2)) => Ok(([a - c1 - c2, c1, c2], true)),
        None => Err(Error::EmptyGrid(alloc::format!(
            "no point of (1/{a})Z^2 lies inside Delta_delta"
        ))),
    }
}

/// The achievable counts nearest to `target` in L¹, given counts `fixed`
/// already forced on `[1, a]`: every `c_i >= fixed_i` and the point stays in
/// `Δ_δ`. Ties go to the smaller `c1`.
pub fn clamp_counts(
    params: &InteriorParams,
    target: [u64; 3],
    fixed: [u64; 3],
    a: u64,
) -> Result<[u64; 3]> {
    let t = target.map(|x| x as i128);
    let cost = |c1: u64, c2: u64| {
        let c0 = (a - c1 - c2) as i128;
        (c0 - t[0]).abs() + (c1 as i128 - t[1]).abs() + (c2 as i128 - t[2]).abs()
    };
    let (p, q) = (params.delta.0 as u128, params.delta.1 as u128);
    let a128 = a as u128;
    // Δ_δ in counts: c_i > δa and c1 + c2 < (1 - δ)a.
    let c_min = (p * a128 / q + 1) as u64;
    let sum_max = (((q - p) * a128 - 1) / q) as u64;
    let mut best: Option<(i128, u64, u64)> = None;
    for c1 in fixed[1].max(c_min)..=a.saturating_sub(fixed[0] + fixed[2]) {
        let lo = fixed[2].max(c_min);
        let hi = (a - fixed[0] - c1).min(sum_max.saturating_sub(c1));
        if lo > hi || c1 > sum_max {
            continue;
        }
        // The cost is convex in c2 with kinks at the c2 and c0 targets.
        let clamp = |x: i128| x.clamp(lo as i128, hi as i128) as u64;
        for c2 in [lo, hi, clamp(t[2]), clamp(a as i128 - c1 as i128 - t[0])] {
            let c = cost(c1, c2);
            if best.is_none_or(|(bc, _, _)| c < bc) {
                best = Some((c, c1, c2));
            }
        }
    }
    match best {
        Some((_, c1, c2)) => Ok([a - c1 - c2, c1, c2]),
        None => Err(Error::Infeasible(alloc::format!(
            "no counts in Delta_delta dominate the fixed counts {fixed:?} on [1, {a}]"
        ))),
    }
}

/// Next target for level `n`. `fixed` are the counts already forced on
/// `[1, a_n]` by lower levels. Advances `cursor` past rejected points.
pub fn next_target(
    params: &InteriorParams,
    n: usize,
    fixed: [u64; 3],
    cursor: &mut TargetCursor,
    log: &mut Vec<Adjustment>,
) -> Result<TargetVector> {
    let a = params
        .schedule
        .a_u64(n)
        .ok_or_else(|| Error::InvalidParams(alloc::format!("a_{n} exceeds 64 bits")))?;
    let delta = params.delta_f64();
    let side = 1.0 - 3.0 * delta;
    let point = loop {
        let (u, w) = InteriorParams::kronecker(cursor.0);
        cursor.0 += 1;
        let p = (delta + u * side, delta + w * side);
        if p.0 + p.1 < 1.0 - delta {
            break p;
        }
    };
    let (grid, snapped) = snap_to_grid(params, point, a)?;
    let rounded = [
        a.saturating_sub(libm::round(point.0 * a as f64) as u64 + libm::round(point.1 * a as f64) as u64),
        libm::round(point.0 * a as f64) as u64,
        libm::round(point.1 * a as f64) as u64,
    ];
    if snapped {
        log.push(Adjustment {
            level: n,
            kind: AdjustmentKind::Snap,
            from: rounded,
            to: grid,
        });
    }
    let counts = if (0..3).all(|i| grid[i] >= fixed[i]) {
        grid
    } else {
        let c = clamp_counts(params, grid, fixed, a)?;
        log.push(Adjustment {
            level: n,
            kind: AdjustmentKind::Clamp,
            from: grid,
            to: c,
        });
        c
    };
    let den = BigInt::from(a);
    Ok(TargetVector {
        level: n,
        rho: (
            BigRational::new(BigInt::from(counts[1]), den.clone()),
            BigRational::new(BigInt::from(counts[2]), den),
        ),
        counts,
        requested: point,
    })
}

/// Fills `free` slots with `weights[s]` copies of each symbol, interleaved by
/// smooth weighted round-robin.
fn interleave(weights: [u64; 3], free: usize) -> Vec<Symbol> {
    let total: i128 = weights.iter().map(|&w| w as i128).sum();
    debug_assert_eq!(total as usize, free);
    let mut current = [0i128; 3];
    let mut out = Vec::with_capacity(free);
    for _ in 0..free {
        for i in 0..3 {
            current[i] += weights[i] as i128;
        }
        let pick = (0..3).max_by_key(|&i| (current[i], core::cmp::Reverse(i))).unwrap();
        current[pick] -= total;
        out.push(Symbol::ALL[pick]);
    }
    out
}

/// The generated prefix `[1, a_N]` together with its targets.
#[derive(Debug, Clone)]
pub struct InteriorSequence {
    params: InteriorParams,
    targets: Vec<TargetVector>,
    adjustments: Vec<Adjustment>,
    sequence: Materialized,
}

impl InteriorSequence {
    /// Generates every level up to the schedule's `max_level`.
    pub fn generate(params: InteriorParams) -> Result<Self> {
        let s = &params.schedule;
        let top = s.max_level();
        let a_top = s
            .a_u64(top)
            .filter(|&a| a <= DEFAULT_MATERIALIZATION_CAP)
            .ok_or(Error::BudgetExceeded {
                budget: DEFAULT_MATERIALIZATION_CAP,
            })?;
        let mut w: Vec<Symbol> = Vec::with_capacity(a_top as usize);
        let mut cursor = TargetCursor(params.target_seed);
        let mut targets = Vec::with_capacity(top);
        let mut adjustments = Vec::new();
        for n in 1..=top {
            let a = s.a_u64(n).unwrap() as usize;
            let periods: Vec<(usize, usize)> = (1..n)
                .rev()
                .map(|k| (s.a_u64(k).unwrap() as usize, s.period_u64(k).unwrap() as usize))
                .collect();
            let old = w.len();
            let mut fixed = [0u64; 3];
            let mut free_slots = Vec::new();
            let mut layout: Vec<Option<Symbol>> = Vec::with_capacity(a - old);
            for j in old..a {
                let inherited = periods.iter().find_map(|&(ak, pk)| {
                    let off = j % pk;
                    (off < ak).then(|| w[off])
                });
                if let Some(sym) = inherited {
                    fixed[sym.index()] += 1;
                } else {
                    free_slots.push(j);
                }
                layout.push(inherited);
            }
            for &sym in &w {
                fixed[sym.index()] += 1;
            }
            let target = next_target(&params, n, fixed, &mut cursor, &mut adjustments)?;
            let extra = [0, 1, 2].map(|i| target.counts[i] - fixed[i]);
            let mut fill = interleave(extra, free_slots.len()).into_iter();
            w.extend(layout.into_iter().map(|s| s.unwrap_or_else(|| fill.next().unwrap())));
            let got = crate::symbol::psi(&w);
            if (got.x, got.y) != (target.counts[1], target.counts[2]) {
                return Err(Error::Infeasible(alloc::format!(
                    "level {n}: psi([1, a_n]) = ({}, {}) misses the target",
                    got.x,
                    got.y
                )));
            }
            targets.push(target);
        }
        let sequence = Materialized::new(Some(params.schedule.clone()), w);
        Ok(InteriorSequence {
            params,
            targets,
            adjustments,
            sequence,
        })
    }

    pub fn params(&self) -> &InteriorParams {
        &self.params
    }

    pub fn targets(&self) -> &[TargetVector] {
        &self.targets
    }

    /// Every snap and clamp that was applied, in level order.
    pub fn adjustments(&self) -> &[Adjustment] {
        &self.adjustments
    }

    pub fn sequence(&self) -> &Materialized {
        &self.sequence
    }

    /// `psi([1, a_n]) / a_n == rho_n` exactly and `rho_n ∈ Δ_δ`, per level.
    pub fn check_targets(&self) -> crate::Report {
        let mut r = crate::Report::new(
            "interior_targets",
            "each level averages exactly to its target, which lies strictly inside Delta_delta",
        );
        for t in &self.targets {
            let a = self.params.schedule.a_u64(t.level).unwrap();
            let p = self.sequence.prefix(a);
            let got = (
                BigRational::new(BigInt::from(p.x), BigInt::from(a)),
                BigRational::new(BigInt::from(p.y), BigInt::from(a)),
            );
            if got != t.rho {
                r.fail(alloc::format!("level {}: average {:?} != target {:?}", t.level, got, t.rho));
            }
            if !self.params.in_delta_region(t.counts[1], t.counts[2], a) {
                r.fail(alloc::format!("level {}: target outside Delta_delta", t.level));
            }
        }
        r.stat("levels", self.targets.len());
        r.stat("adjustments", self.adjustments.len());
        r
    }

    /// Largest distance from a probe point of `Δ_δ` to the nearest target;
    /// a finite stand-in for density, reported rather than asserted.
    pub fn coverage_radius(&self, probes: u64) -> f64 {
        let delta = self.params.delta_f64();
        let side = 1.0 - 3.0 * delta;
        let pts: Vec<(f64, f64)> = self
            .targets
            .iter()
            .map(|t| {
                let a = self.params.schedule.a_u64(t.level).unwrap() as f64;
                (t.counts[1] as f64 / a, t.counts[2] as f64 / a)
            })
            .collect();
        let mut worst: f64 = 0.0;
        // Probes use a different index range from the targets.
        for k in 0..probes {
            let (u, w) = InteriorParams::kronecker(k.wrapping_mul(7).wrapping_add(1 << 40));
            let p = (delta + u * side, delta + w * side);
            if p.0 + p.1 >= 1.0 - delta {
                continue;
            }
            let near = pts
                .iter()
                .map(|q| libm::hypot(p.0 - q.0, p.1 - q.1))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
        }
        worst
    }
}

impl SymbolicSequence for InteriorSequence {
    fn schedule(&self) -> Option<&BlockSchedule> {
        Some(&self.params.schedule)
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.sequence.len())
    }

    fn symbol(&self, j: u64) -> Result<Symbol> {
        self.sequence.symbol(j)
    }

    fn psi_range(&self, lo: u64, hi: u64) -> Result<Psi> {
        self.sequence.psi_range(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> InteriorParams {
        InteriorParams::with_pow2(20, 4, 4, 0).unwrap()
    }

    #[test]
    fn delta_is_one_sixteenth() {
        let p = params();
        assert_eq!(p.delta(), BigRational::new(1.into(), 16.into()));
        assert_eq!(p.schedule().a_u64(2), Some(660));
        assert_eq!(p.schedule().a_u64(4), Some(5_534_100));
    }

    #[test]
    fn rejects_large_delta() {
        assert!(InteriorParams::with_pow2(20, 2, 3, 0).is_err());
        assert!(InteriorParams::new(20, LevelRule::Constant { value: 8 }, 3, 0).is_err());
    }

    #[test]
    fn snap_example() {
        let p = params();
        let (c, snapped) = snap_to_grid(&p, (0.25, 0.35), 20).unwrap();
        assert_eq!(c, [8, 5, 7]);
        assert!(!snapped);
        // (0, 0) rounds outside Δ_δ and is moved to the nearest inside point.
        let (c, snapped) = snap_to_grid(&p, (0.0, 0.0), 20).unwrap();
        assert!(snapped);
        assert!(p.in_delta_region(c[1], c[2], 20));
        assert_eq!((c[1], c[2]), (2, 2));
    }

    #[test]
    fn clamp_to_fixed_ones() {
        let p = params();
        // Target wants 5 ones but 9 are already fixed.
        let c = clamp_counts(&p, [8, 5, 7], [0, 9, 0], 20).unwrap();
        assert_eq!(c[1], 9);
        assert!(p.in_delta_region(c[1], c[2], 20));
        let cost = |c: [u64; 3]| (0..3).map(|i| (c[i] as i64 - [8, 5, 7][i] as i64).abs()).sum::<i64>();
        // Brute force over all achievable points.
        let mut best = i64::MAX;
        for c1 in 9..=20u64 {
            for c2 in 0..=20 - c1 {
                if p.in_delta_region(c1, c2, 20) {
                    best = best.min(cost([20 - c1 - c2, c1, c2]));
                }
            }
        }
        assert_eq!(cost(c), best);
    }

    #[test]
    fn interleave_is_spread_out() {
        let w = interleave([2, 1, 1], 4);
        assert_eq!(w.len(), 4);
        assert_eq!(crate::symbol::psi(&w), Psi::new(1, 1));
        assert_ne!(w[0], w[1]);
    }

    #[test]
    fn generated_levels_hit_targets() {
        let s = InteriorSequence::generate(params()).unwrap();
        assert_eq!(s.targets().len(), 4);
        let r = s.check_targets();
        assert!(r.passed(), "{r:?}");
        // Level-1 blocks repeat verbatim inside level 2.
        let sch = s.params().schedule();
        let w = s.sequence().symbols();
        for j in 1..=660u64 {
            if sch.in_level_u64(j, 1) {
                assert_eq!(w[j as usize - 1], w[((j - 1) % 640) as usize]);
            }
        }
    }

    #[test]
    fn seeds_change_targets() {
        let a = InteriorSequence::generate(InteriorParams::with_pow2(20, 4, 2, 0).unwrap()).unwrap();
        let b = InteriorSequence::generate(InteriorParams::with_pow2(20, 4, 2, 5).unwrap()).unwrap();
        assert_ne!(a.targets()[0].counts, b.targets()[0].counts);
    }
}
