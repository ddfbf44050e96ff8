//! Sampled and exact checks of window averages of the separator sequence.
//!
//! All window sums come from exact prefix counts, so a check on an interval
//! of length `10^9` costs the same as one of length `10`.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{self, Point};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::separator::{random_below, IntervalTag, SeparatorSequence};
use crate::sequence::SymbolicSequence;
use crate::symbol::Symbol;

/// `rho([lo, hi])` as an exact point, from prefix counts.
pub fn rho_big(seq: &SeparatorSequence, lo: &BigUint, hi: &BigUint) -> Result<Point> {
    if lo.is_zero() || hi < lo {
        return Err(Error::InvalidParams(format!("bad window [{lo}, {hi}]")));
    }
    let (hx, hy) = seq.psi_prefix(hi)?;
    let (lx, ly) = seq.psi_prefix(&(lo - 1u32))?;
    let len = BigInt::from(hi - lo + 1u32);
    Ok((
        BigRational::new(BigInt::from(hx - lx), len.clone()),
        BigRational::new(BigInt::from(hy - ly), len),
    ))
}

fn vertex(s: Symbol) -> Point {
    geometry::vertices()[s.index()].clone()
}

/// `rho([1, a_{n+1}])` lies within `1/8` of `v_0` for every cached level.
pub fn check_level_averages(seq: &SeparatorSequence) -> Result<Report> {
    let mut r = Report::new("level_average", "rho([1, a_n]) lies within 1/8 of v_0");
    let s = seq.params().schedule();
    for n in 1..=seq.levels() {
        let p = rho_big(seq, &BigUint::one(), s.a(n))?;
        r.stat(&format!("dist_level{n}"), format!("{:.6}", f64_dist(&p, &vertex(Symbol::Zero))));
        if !geometry::in_ball(&p, &vertex(Symbol::Zero), 1, 8) {
            r.fail(format!("level {n}: rho([1, a_{n}]) = ({}, {})", p.0, p.1));
        }
    }
    Ok(r)
}

fn f64_dist(p: &Point, q: &Point) -> f64 {
    libm::sqrt(geometry::sq_dist(p, q).to_f64().unwrap_or(f64::INFINITY))
}

/// Sampled prefixes `[1, m]` and suffixes `[m, a_{n+1}]` of each level have
/// averages within `1/8` of `v_0`.
pub fn check_prefix_suffix(seq: &SeparatorSequence, samples: u64, seed: u64) -> Result<Report> {
    let mut r = Report::new(
        "prefix_suffix",
        "prefixes and suffixes of [1, a_{n+1}] average within 1/8 of v_0",
    )
    .with_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = seq.params().schedule();
    let v0 = vertex(Symbol::Zero);
    let mut worst = 0.0f64;
    for n in 2..=seq.levels() {
        let top = s.a(n).clone();
        for k in 0..samples {
            // Alternate uniform and log-uniform positions so both short and
            // long windows are exercised.
            let m = if k % 2 == 0 {
                random_below(&mut rng, &top) + 1u32
            } else {
                log_uniform(&mut rng, &top)
            };
            for (lo, hi) in [(BigUint::one(), m.clone()), (m.clone(), top.clone())] {
                let p = rho_big(seq, &lo, &hi)?;
                worst = worst.max(f64_dist(&p, &v0));
                if !geometry::in_ball(&p, &v0, 1, 8) {
                    r.fail(format!("level {}: rho([{lo}, {hi}]) = ({}, {})", n - 1, p.0, p.1));
                }
            }
        }
    }
    r.stat("samples_per_level", samples);
    r.stat("max_dist", format!("{worst:.6}"));
    Ok(r)
}

/// A value in `[1, top]` whose logarithm is uniform.
fn log_uniform<R: Rng>(rng: &mut R, top: &BigUint) -> BigUint {
    let bits = top.bits() as f64;
    let e = rng.gen::<f64>() * bits * core::f64::consts::LN_2;
    let x = libm::exp(e);
    let v = BigUint::from(x as u128).max(BigUint::one());
    v.min(top.clone())
}

/// Each interval of each cached decomposition averages within `1/16` of the
/// vertex of its symbol.
pub fn check_interval_averages(seq: &SeparatorSequence) -> Result<Report> {
    let mut r = Report::new(
        "interval_average",
        "each interval of the decomposition averages within 1/16 of the vertex of its symbol",
    );
    for n in 1..seq.levels() {
        let dec = seq.decomposition(n)?;
        for (tag, sp) in &dec.intervals {
            let lo = sp.lo.to_biguint().unwrap();
            let hi = sp.hi.to_biguint().unwrap();
            let p = rho_big(seq, &lo, &hi)?;
            let v = vertex(tag.symbol());
            r.stat(&format!("level{n}_{tag}"), format!("{:.6}", f64_dist(&p, &v)));
            if !geometry::in_ball(&p, &v, 1, 16) {
                r.fail(format!("level {n}: rho({tag}) = ({}, {})", p.0, p.1));
            }
        }
        let c = dec.interval(IntervalTag::I12c);
        let p = rho_big(seq, &c.lo.to_biguint().unwrap(), &c.hi.to_biguint().unwrap())?;
        if !geometry::in_ball(&p, &vertex(Symbol::Two), 1, 8) {
            r.fail(format!("level {n}: central window average ({}, {}) is not near v_2", p.0, p.1));
        }
    }
    Ok(r)
}

/// `count` random intervals of `[1, a_2]` with log-uniform lengths in
/// `[10, a_2 / 4]`; every average must lie in `S`.
pub fn check_windows_in_s(seq: &SeparatorSequence, count: u64, seed: u64) -> Result<Report> {
    let mut r = Report::new(
        "windows_in_s",
        "every window average of the separator lies within 1/8 of T",
    )
    .with_seed(seed);
    let a2 = seq
        .params()
        .schedule()
        .a_u64(2)
        .ok_or_else(|| Error::InvalidParams("a_2 exceeds 64 bits".into()))?;
    let (min_len, max_len) = (10u64, a2 / 4);
    if max_len < min_len {
        return Err(Error::InvalidParams(format!("a_2 = {a2} is too small to sample")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lmin, lmax) = (libm::log(min_len as f64), libm::log(max_len as f64));
    let mut closest = f64::INFINITY;
    for _ in 0..count {
        let len = (libm::exp(rng.gen_range(lmin..=lmax)) as u64).clamp(min_len, max_len);
        let lo = rng.gen_range(1..=a2 - len + 1);
        let rv = seq.rho(lo, lo + len - 1)?;
        let (x, y) = rv.to_f64();
        closest = closest.min(0.125 - x.min(y).min((1.0 - x - y) / core::f64::consts::SQRT_2));
        if !geometry::in_s_rho(&rv) {
            r.fail(format!("rho([{lo}, {}]) = {rv}", lo + len - 1));
        }
    }
    r.stat("intervals", count);
    r.stat("min_margin", format!("{closest:.6}"));
    Ok(r)
}

/// All window-average checks of the separator sequence.
pub fn separator_suite(seq: &SeparatorSequence, samples: u64, seed: u64) -> Result<Vec<Report>> {
    Ok(alloc::vec![
        check_level_averages(seq)?,
        check_interval_averages(seq)?,
        check_prefix_suffix(seq, samples, seed)?,
        check_windows_in_s(seq, samples, seed)?,
    ])
}
