//! Window averages and the checks built on them.

pub mod checks;
pub mod geometry;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::IndexInterval;
use crate::error::{Error, Result};
use crate::report::Report;
use crate::separator::SeparatorSequence;
use crate::sequence::SymbolicSequence;
use crate::symbol::{Psi, RotationVector, Symbol};

pub use geometry::{cloud_area, dist_to_t, hull, in_s, in_s_rho, winding_number, Point};

/// `psi` of a window, by streaming.
pub fn psi_window<S: SymbolicSequence + ?Sized>(seq: &S, lo: u64, hi: u64) -> Result<Psi> {
    seq.check_range(lo, hi)?;
    seq.psi_range(lo, hi)
}

/// `rho(J)` for `J = [lo, hi]`.
pub fn rho<S: SymbolicSequence + ?Sized>(seq: &S, lo: u64, hi: u64) -> Result<RotationVector> {
    seq.check_range(lo, hi)?;
    seq.rho(lo, hi)
}

/// Averages of the windows of one length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationCloud {
    pub window: u64,
    /// `(start, rho([start, start + window - 1]))`.
    pub points: Vec<(u64, RotationVector)>,
    /// Set when the evaluation budget ran out before the range was covered.
    pub truncated: bool,
}

/// `rho([i, i + n - 1])` for `i = lo, lo + stride, …` while the window ends
/// by `hi`, maintained by sliding. At most `budget` windows are produced.
pub fn window_cloud<S: SymbolicSequence + ?Sized>(
    seq: &S,
    n: u64,
    lo: u64,
    hi: u64,
    stride: u64,
    budget: u64,
) -> Result<RotationCloud> {
    if n == 0 || stride == 0 {
        return Err(Error::InvalidParams("window length and stride must be positive".into()));
    }
    let mut cloud = RotationCloud {
        window: n,
        points: Vec::new(),
        truncated: false,
    };
    if lo == 0 {
        return Err(Error::IndexOutOfRange("0".into()));
    }
    if hi < lo || hi - lo + 1 < n {
        return Ok(cloud);
    }
    seq.check_range(lo, hi)?;
    let mut start = lo;
    let mut acc = seq.psi_range(lo, lo + n - 1)?;
    loop {
        if cloud.points.len() as u64 >= budget {
            cloud.truncated = true;
            break;
        }
        cloud.points.push((start, RotationVector::new(acc, n)?));
        let next = start + stride;
        if next + n - 1 > hi {
            break;
        }
        if stride < n {
            for j in start..next {
                acc.pop(seq.symbol(j)?);
            }
            for j in start + n..next + n {
                acc.push(seq.symbol(j)?);
            }
        } else {
            acc = seq.psi_range(next, next + n - 1)?;
        }
        start = next;
    }
    Ok(cloud)
}

/// The path `rho(J1 + i)` from the central window of a separator level to
/// its translate.
#[derive(Debug, Clone)]
pub struct SweepPath {
    pub level: usize,
    pub j1: IndexInterval,
    pub j2: IndexInterval,
    /// `M_n`: offset of `J2` relative to `J1`.
    pub shift: BigUint,
    pub stride: u64,
    /// `(i, rho(J1 + i))` for `i = 0, stride, …`, ending at `i = M_n`.
    pub points: Vec<(BigUint, RotationVector)>,
}

impl SweepPath {
    pub fn window_len(&self) -> u64 {
        self.points[0].1.len
    }

    /// Whether the path closes exactly: `rho(J1) = rho(J2)`.
    pub fn is_closed(&self) -> bool {
        self.points.first().map(|p| p.1) == self.points.last().map(|p| p.1)
    }

    /// Winding number around `(1/3, 1/3)`.
    pub fn winding_number(&self) -> Result<i64> {
        // Scale by 3|J| so the centre and all points are integral.
        let n = self.window_len() as i128;
        let pts: Vec<(i128, i128)> = self
            .points
            .iter()
            .map(|(_, r)| (3 * r.psi.x as i128, 3 * r.psi.y as i128))
            .collect();
        geometry::winding_number_by(&pts, &(n, n))
    }
}

/// Default sweep stride: `|J1| / 1000`.
pub fn default_stride(seq: &SeparatorSequence, n: usize) -> Result<u64> {
    let (j1, _) = seq.sweep_windows(n)?;
    Ok((j1.len() / 1000u32).to_u64().unwrap_or(u64::MAX).max(1))
}

/// The level-`n` sweep path with the given stride, which may not exceed
/// `|J1| / 100`.
pub fn sweep_path(seq: &SeparatorSequence, n: usize, stride: u64) -> Result<SweepPath> {
    let (j1, j2) = seq.sweep_windows(n)?;
    let len = j1.len();
    let max = (&len / 100u32).to_u64().unwrap_or(u64::MAX);
    if stride == 0 || stride > max {
        return Err(Error::StrideTooCoarse { stride, max });
    }
    let len_u64 = len
        .to_u64()
        .ok_or_else(|| Error::InvalidParams(format!("|J1| = {len} exceeds 64 bits")))?;
    let shift = &j2.lo - &j1.lo;
    let lo_before = &j1.lo - 1u32;
    let mut points = Vec::new();
    let mut i = BigUint::from(0u32);
    loop {
        let i_now = if i > shift { shift.clone() } else { i.clone() };
        let (hx, hy) = seq.psi_prefix(&(&j1.hi + &i_now))?;
        let (lx, ly) = seq.psi_prefix(&(&lo_before + &i_now))?;
        let psi = Psi::new(
            (hx - lx).to_u64().expect("window count fits"),
            (hy - ly).to_u64().expect("window count fits"),
        );
        points.push((i_now.clone(), RotationVector::new(psi, len_u64)?));
        if i_now == shift {
            break;
        }
        i += stride;
    }
    Ok(SweepPath {
        level: n,
        j1,
        j2,
        shift,
        stride,
        points,
    })
}

/// Checks a sweep path: every point in `S`, exact closure, consecutive
/// points within `2 stride / |J1|` in L¹, and winding number `±1` around
/// `(1/3, 1/3)`.
pub fn check_sweep(path: &SweepPath) -> Report {
    let mut r = Report::new(
        "sweep",
        "the sweep path stays in S, closes exactly, and winds once around (1/3, 1/3)",
    );
    r.stat("level", path.level);
    r.stat("points", path.points.len());
    r.stat("stride", path.stride);
    r.stat("shift", &path.shift);
    for (i, rv) in &path.points {
        if !in_s_rho(rv) {
            r.fail(format!("rho(J1 + {i}) = {rv} is outside S"));
        }
    }
    let step = 2 * path.stride as i64;
    for w in path.points.windows(2) {
        let (a, b) = (w[0].1.psi, w[1].1.psi);
        let d = (a.x as i64 - b.x as i64).abs() + (a.y as i64 - b.y as i64).abs();
        if d > step {
            r.fail(format!("points at offsets {} and {} are {d}/|J1| apart in L1", w[0].0, w[1].0));
        }
    }
    if !path.is_closed() {
        r.fail(format!(
            "rho(J1) = {} differs from rho(J2) = {}",
            path.points[0].1,
            path.points.last().unwrap().1
        ));
    }
    match path.winding_number() {
        Ok(w) => {
            r.stat("winding_number", w);
            if w.abs() != 1 {
                r.fail(format!("winding number {w}"));
            }
        }
        Err(e) => r.fail(format!("winding number undefined: {e}")),
    }
    r
}

/// Checks the Toeplitz property at `samples` random positions of
/// `[1, horizon]`, or at every position when `samples >= horizon`: each `j`
/// is compared with its translates by the period `a_m d_m` of the level `m`
/// that fixed it, up to `cap` translates on each side plus the base position
/// in `[1, a_m]`. Translates may run past `horizon` as far as the sequence
/// can be evaluated. An index disagreeing with the majority of its orbit is
/// reported.
pub fn toeplitz_check<S: SymbolicSequence + ?Sized>(
    seq: &S,
    horizon: u64,
    samples: u64,
    seed: u64,
    cap: u64,
) -> Result<Report> {
    let mut r = Report::new(
        "toeplitz",
        "every position repeats with the period of the level that fixed it",
    )
    .with_seed(seed);
    let schedule = seq
        .schedule()
        .ok_or_else(|| Error::InvalidParams("sequence has no block schedule".into()))?;
    let reach = seq.horizon().unwrap_or(u64::MAX);
    let horizon = horizon.min(reach);
    if horizon == 0 {
        return Ok(Report::skipped("toeplitz", "", "empty horizon"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0u64;
    let mut reported = BTreeMap::new();
    let exhaustive = samples >= horizon;
    let total = if exhaustive { horizon } else { samples };
    for step in 0..total {
        let j = if exhaustive { step + 1 } else { rng.gen_range(1..=horizon) };
        let Some(m) = schedule.fill_level_u64(j) else {
            continue;
        };
        let Some(p) = schedule.period_u64(m) else {
            continue;
        };
        let base = (j - 1) % p + 1;
        let k = (j - 1) / p;
        let mut orbit = Vec::new();
        orbit.push(base);
        for kk in k.saturating_sub(cap)..=k.saturating_add(cap) {
            let Some(x) = kk.checked_mul(p).and_then(|x| x.checked_add(base)) else {
                break;
            };
            if x > reach {
                break;
            }
            if x != base {
                orbit.push(x);
            }
        }
        // Three members let a majority single out a wrong copy.
        let mut next = orbit.last().copied().unwrap_or(base);
        while orbit.len() < 3 {
            match next.checked_add(p).filter(|&x| x <= reach) {
                Some(x) => {
                    orbit.push(x);
                    next = x;
                }
                None => break,
            }
        }
        let syms: Vec<Symbol> = orbit.iter().map(|&x| seq.symbol(x)).collect::<Result<_>>()?;
        compared += orbit.len() as u64 - 1;
        let mut votes = [0usize; 3];
        for s in &syms {
            votes[s.index()] += 1;
        }
        let major = (0..3).max_by_key(|&i| (votes[i], core::cmp::Reverse(i))).unwrap();
        if votes[major] == orbit.len() {
            continue;
        }
        if 2 * votes[major] > orbit.len() {
            for (x, s) in orbit.iter().zip(&syms) {
                if s.index() != major && reported.insert(*x, ()).is_none() {
                    r.fail(format!(
                        "index {x}: symbol {s}, but its period-{p} orbit (level {m}) carries {}",
                        Symbol::ALL[major]
                    ));
                }
            }
        } else if reported.insert(base, ()).is_none() {
            // Too few copies to tell which one is wrong.
            r.fail(format!("orbit of {base} with period {p} (level {m}) is inconsistent: {orbit:?}"));
        }
    }
    r.stat("samples", total);
    r.stat("comparisons", compared);
    r.stat("horizon", horizon);
    Ok(r)
}

/// Largest gap between consecutive occurrences of each word of length
/// `word_len` in `[1, horizon]`, a finite stand-in for uniform recurrence.
/// Fails only when a gap exceeds `bound`, if one is given.
pub fn almost_periodicity_check<S: SymbolicSequence + ?Sized>(
    seq: &S,
    word_len: usize,
    horizon: u64,
    bound: Option<u64>,
    budget: u64,
) -> Result<Report> {
    if word_len == 0 || word_len > 20 {
        return Err(Error::InvalidParams(format!("word length {word_len} outside [1, 20]")));
    }
    let reach = seq.horizon().unwrap_or(u64::MAX);
    let horizon = horizon.min(reach);
    if horizon > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut r = Report::new(
        "almost_periodicity",
        "every word recurs with bounded gaps on the horizon",
    )
    .with_budget(budget);
    let modulus = 3u64.pow(word_len as u32);
    let mut last: BTreeMap<u64, (u64, u64, u64)> = BTreeMap::new();
    let mut code = 0u64;
    for j in 1..=horizon {
        code = (code * 3 + seq.symbol(j)?.index() as u64) % modulus;
        if j < word_len as u64 {
            continue;
        }
        let start = j + 1 - word_len as u64;
        last.entry(code)
            .and_modify(|(prev, gap, count)| {
                *gap = (*gap).max(start - *prev);
                *prev = start;
                *count += 1;
            })
            .or_insert((start, 0, 1));
    }
    let max_gap = last.values().map(|v| v.1).max().unwrap_or(0);
    let singles = last.values().filter(|v| v.2 == 1).count();
    r.stat("word_length", word_len);
    r.stat("horizon", horizon);
    r.stat("distinct_words", last.len());
    r.stat("single_occurrences", singles);
    r.stat("max_gap", max_gap);
    for (c, (_, gap, count)) in &last {
        if bound.is_some_and(|b| *gap > b) {
            r.fail(format!("word {} recurs with gap {gap} ({count} occurrences)", word_string(*c, word_len)));
        }
    }
    Ok(r)
}

fn word_string(mut code: u64, len: usize) -> alloc::string::String {
    let mut digits = alloc::vec![b'0'; len];
    for d in digits.iter_mut().rev() {
        *d = b'0' + (code % 3) as u8;
        code /= 3;
    }
    alloc::string::String::from_utf8(digits).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Materialized;

    fn word(s: &str) -> Materialized {
        Materialized::new(None, s.bytes().map(|c| Symbol::from_digit(c).unwrap()).collect())
    }

    #[test]
    fn rho_examples() {
        let w = word("0112");
        let r = rho(&w, 1, 4).unwrap();
        assert_eq!(r, RotationVector::new(Psi::new(2, 1), 4).unwrap());
        assert_eq!(format!("{r}"), "(1/2, 1/4)");
        let twos = word("2222222");
        assert_eq!(format!("{}", rho(&twos, 2, 6).unwrap()), "(0/1, 1/1)");
    }

    #[test]
    fn cloud_of_constant_sequence() {
        let z = word(&"0".repeat(100));
        let c = window_cloud(&z, 10, 1, 100, 3, u64::MAX).unwrap();
        assert_eq!(c.points.len(), 31);
        assert!(c.points.iter().all(|(_, r)| r.psi == Psi::ZERO));
        let t = window_cloud(&z, 10, 1, 100, 1, 5).unwrap();
        assert!(t.truncated);
        assert_eq!(t.points.len(), 5);
    }

    #[test]
    fn sliding_matches_scratch() {
        let w = word("0120210120011222100201210201102012");
        for stride in 1..12 {
            let c = window_cloud(&w, 7, 2, w.len(), stride, u64::MAX).unwrap();
            for (s, r) in &c.points {
                assert_eq!(*r, w.rho(*s, s + 6).unwrap());
            }
        }
    }

    #[test]
    fn almost_periodicity_examples() {
        let z = word(&"0".repeat(50));
        let r = almost_periodicity_check(&z, 1, 50, Some(1), 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.statistics["max_gap"], "1");
        let w = word("0102010201020102");
        let r = almost_periodicity_check(&w, 2, 16, None, 1000).unwrap();
        assert_eq!(r.statistics["distinct_words"], "4");
        let r = almost_periodicity_check(&w, 2, 16, Some(2), 1000).unwrap();
        assert!(!r.passed());
    }
}
