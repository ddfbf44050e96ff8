//! Exact planar geometry on rational points.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::symbol::RotationVector;

pub type Point = (BigRational, BigRational);

/// The vertices `v_0`, `v_1`, `v_2` of the triangle `T`.
pub fn vertices() -> [Point; 3] {
    let (z, o) = (BigRational::zero(), BigRational::one());
    [(z.clone(), z.clone()), (o.clone(), z.clone()), (z, o)]
}

pub fn point(r: &RotationVector) -> Point {
    (r.x(), r.y())
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Squared distance from `p` to the segment `[a, b]`.
pub fn sq_dist_to_segment(p: &Point, a: &Point, b: &Point) -> BigRational {
    let (dx, dy) = (&b.0 - &a.0, &b.1 - &a.1);
    let (px, py) = (&p.0 - &a.0, &p.1 - &a.1);
    let len2 = &dx * &dx + &dy * &dy;
    let t = if len2.is_zero() {
        BigRational::zero()
    } else {
        ((&px * &dx + &py * &dy) / &len2).clamp(BigRational::zero(), BigRational::one())
    };
    let (ex, ey) = (px - &t * dx, py - t * dy);
    &ex * &ex + &ey * &ey
}

pub fn sq_dist(p: &Point, q: &Point) -> BigRational {
    let (dx, dy) = (&p.0 - &q.0, &p.1 - &q.1);
    &dx * &dx + &dy * &dy
}

/// Squared distance from `p` to the triangle boundary `T`.
pub fn sq_dist_to_t(p: &Point) -> BigRational {
    let [v0, v1, v2] = vertices();
    let d01 = sq_dist_to_segment(p, &v0, &v1);
    let d02 = sq_dist_to_segment(p, &v0, &v2);
    let d12 = sq_dist_to_segment(p, &v1, &v2);
    d01.min(d02).min(d12)
}

pub fn dist_to_t(p: &Point) -> f64 {
    libm::sqrt(sq_dist_to_t(p).to_f64().unwrap_or(f64::INFINITY))
}

/// Floating distance to `T` for a point of the closed simplex.
fn dist_to_t_f64(x: f64, y: f64) -> f64 {
    // Inside the simplex the nearest edge point is the orthogonal foot.
    x.min(y).min((1.0 - x - y) / core::f64::consts::SQRT_2).abs()
}

/// Whether `p` lies in the closed `1/8`-neighbourhood of `T`.
pub fn in_s(p: &Point) -> bool {
    sq_dist_to_t(p) <= rat(1, 64)
}

/// `in_s` for a window average, with a floating-point filter that defers
/// to exact arithmetic near the boundary of the band.
pub fn in_s_rho(r: &RotationVector) -> bool {
    let (x, y) = r.to_f64();
    let d = dist_to_t_f64(x, y);
    if d < 0.125 - 1e-9 {
        true
    } else if d > 0.125 + 1e-9 {
        false
    } else {
        in_s(&point(r))
    }
}

/// Whether `p` lies in the closed ball of radius `num/den` around `c`.
pub fn in_ball(p: &Point, c: &Point, num: i64, den: i64) -> bool {
    let r = rat(num, den);
    sq_dist(p, c) <= &r * &r
}

fn cross<T: Clone + Signed>(o: &(T, T), a: &(T, T), b: &(T, T)) -> T {
    (a.0.clone() - o.0.clone()) * (b.1.clone() - o.1.clone())
        - (a.1.clone() - o.1.clone()) * (b.0.clone() - o.0.clone())
}

/// Convex hull in counterclockwise order, without collinear vertices.
pub fn hull_by<T: Clone + Signed + Ord>(points: &[(T, T)]) -> Vec<(T, T)> {
    let mut pts: Vec<(T, T)> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(T, T)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(T, T)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn hull(points: &[Point]) -> Vec<Point> {
    hull_by(points)
}

/// Twice the area of a simple polygon given in order.
pub fn twice_area_by<T: Clone + Signed>(polygon: &[(T, T)]) -> T {
    let n = polygon.len();
    if n < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..n {
        let (p, q) = (&polygon[i], &polygon[(i + 1) % n]);
        acc = acc + p.0.clone() * q.1.clone() - q.0.clone() * p.1.clone();
    }
    acc.abs()
}

/// Area of a simple polygon given in order.
pub fn area(polygon: &[Point]) -> BigRational {
    twice_area_by(polygon) / BigRational::from_integer(2.into())
}

/// Exact hull area of window averages that share one window length.
pub fn cloud_area(cloud: &[RotationVector]) -> BigRational {
    let Some(first) = cloud.first() else {
        return BigRational::zero();
    };
    if cloud.iter().any(|r| r.len != first.len) {
        let pts: Vec<Point> = cloud.iter().map(point).collect();
        return area(&hull(&pts));
    }
    let pts: Vec<(i128, i128)> = cloud.iter().map(|r| (r.psi.x as i128, r.psi.y as i128)).collect();
    let twice = twice_area_by(&hull_by(&pts));
    let n = BigInt::from(first.len);
    BigRational::new(BigInt::from(twice), BigInt::from(2) * &n * &n)
}

fn quadrant<T: Signed>(x: &T, y: &T) -> i8 {
    match (x.is_negative(), y.is_negative()) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

/// Winding number of the closed polyline through `path` (closed implicitly)
/// around `center`, counted by quadrant crossings.
pub fn winding_number_by<T: Clone + Signed + PartialOrd>(path: &[(T, T)], center: &(T, T)) -> Result<i64> {
    if path.is_empty() {
        return Ok(0);
    }
    let rel: Vec<(T, T)> = path
        .iter()
        .map(|(x, y)| (x.clone() - center.0.clone(), y.clone() - center.1.clone()))
        .collect();
    if let Some(i) = rel.iter().position(|(x, y)| x.is_zero() && y.is_zero()) {
        return Err(Error::DegenerateWinding(i));
    }
    let mut quarters: i64 = 0;
    for i in 0..rel.len() {
        let (a, b) = (&rel[i], &rel[(i + 1) % rel.len()]);
        let (qa, qb) = (quadrant(&a.0, &a.1), quadrant(&b.0, &b.1));
        let step = (qb - qa).rem_euclid(4);
        quarters += match step {
            0 => 0,
            1 => 1,
            3 => -1,
            _ => {
                let c = a.0.clone() * b.1.clone() - a.1.clone() * b.0.clone();
                if c.is_zero() {
                    return Err(Error::DegenerateWinding(i));
                }
                if c.is_positive() {
                    2
                } else {
                    -2
                }
            }
        };
    }
    Ok(quarters / 4)
}

/// Winding number of a rational polyline around `center`.
pub fn winding_number(path: &[Point], center: &Point) -> Result<i64> {
    winding_number_by(path, center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Psi;

    fn p(x: i64, y: i64) -> Point {
        (rat(x, 1), rat(y, 1))
    }

    #[test]
    fn membership_examples() {
        assert!(in_s(&p(0, 0)));
        assert_eq!(sq_dist_to_t(&p(0, 0)), BigRational::zero());
        assert!(!in_s(&(rat(1, 3), rat(1, 3))));
        assert!(in_s(&(rat(1, 2), rat(1, 10))));
        // Exactly on the band boundary.
        assert!(in_s(&(rat(1, 2), rat(1, 8))));
        assert!(!in_s(&(rat(1, 2), rat(1, 8) + rat(1, 1_000_000))));
        let d = dist_to_t(&(rat(1, 3), rat(1, 3)));
        assert!((d - (1.0 / 3.0) / core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn filtered_membership_matches_exact() {
        for len in [8u64, 64, 1000] {
            for x in 0..=len {
                for y in (0..=len - x).step_by(((len / 50) as usize).max(1)) {
                    let r = RotationVector::new(Psi::new(x, y), len).unwrap();
                    assert_eq!(in_s_rho(&r), in_s(&point(&r)), "{r}");
                }
            }
        }
    }

    #[test]
    fn hull_and_area() {
        let tri = [p(0, 0), p(1, 0), p(0, 1)];
        assert_eq!(area(&hull(&tri)), rat(1, 2));
        let line = [p(0, 0), p(1, 1), p(2, 2), p(3, 3)];
        assert_eq!(area(&hull(&line)), BigRational::zero());
        let sq = [p(0, 0), p(2, 0), p(2, 2), p(0, 2), p(1, 1), p(1, 0)];
        let h = hull(&sq);
        assert_eq!(h.len(), 4);
        assert_eq!(area(&h), rat(4, 1));
        let cloud: Vec<RotationVector> = [(0, 0), (4, 0), (0, 4), (1, 1)]
            .iter()
            .map(|&(x, y)| RotationVector::new(Psi::new(x, y), 4).unwrap())
            .collect();
        assert_eq!(cloud_area(&cloud), rat(1, 2));
    }

    #[test]
    fn winding_examples() {
        let sq = [p(1, 1), p(-1, 1), p(-1, -1), p(1, -1)];
        assert_eq!(winding_number(&sq, &p(0, 0)).unwrap(), 1);
        assert_eq!(winding_number(&sq, &p(5, 5)).unwrap(), 0);
        let rev: Vec<Point> = sq.iter().rev().cloned().collect();
        assert_eq!(winding_number(&rev, &p(0, 0)).unwrap(), -1);
        let twice: Vec<Point> = sq.iter().chain(sq.iter()).cloned().collect();
        assert_eq!(winding_number(&twice, &p(0, 0)).unwrap(), 2);
        assert!(winding_number(&sq, &p(1, 1)).is_err());
    }
}
