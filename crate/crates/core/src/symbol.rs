//! Symbols, their displacement vectors and exact rotation vectors.

use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// A letter of the alphabet `{0, 1, 2}`.
///
/// Symbol `s` moves by the displacement `v_s`: `v_0 = (0,0)`, `v_1 = (1,0)`,
/// `v_2 = (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum Symbol {
    #[default]
    Zero = 0,
    One = 1,
    Two = 2,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Two];

    pub fn from_digit(c: u8) -> Option<Symbol> {
        match c {
            b'0' => Some(Symbol::Zero),
            b'1' => Some(Symbol::One),
            b'2' => Some(Symbol::Two),
            _ => None,
        }
    }

    pub fn from_index(i: u8) -> Option<Symbol> {
        Self::ALL.get(i as usize).copied()
    }

    pub fn digit(self) -> u8 {
        b'0' + self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// The displacement vector `v_s`.
    pub fn displacement(self) -> (i64, i64) {
        match self {
            Symbol::Zero => (0, 0),
            Symbol::One => (1, 0),
            Symbol::Two => (0, 1),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// Summed displacement `psi(w)` of a word: the number of `1`s and `2`s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Psi {
    pub x: u64,
    pub y: u64,
}

impl Psi {
    pub const ZERO: Psi = Psi { x: 0, y: 0 };

    pub fn new(x: u64, y: u64) -> Self {
        Psi { x, y }
    }

    pub fn push(&mut self, s: Symbol) {
        match s {
            Symbol::Zero => {}
            Symbol::One => self.x += 1,
            Symbol::Two => self.y += 1,
        }
    }

    pub fn pop(&mut self, s: Symbol) {
        match s {
            Symbol::Zero => {}
            Symbol::One => self.x -= 1,
            Symbol::Two => self.y -= 1,
        }
    }

    /// `self - other`; panics on underflow, which only happens when `other`
    /// is not a prefix sum of a prefix of `self`.
    pub fn minus(self, other: Psi) -> Psi {
        Psi {
            x: self.x - other.x,
            y: self.y - other.y,
        }
    }

    pub fn plus(self, other: Psi) -> Psi {
        Psi {
            x: self.x + other.x,
            y: self.y + other.y,
        }
    }

    pub fn scaled(self, k: u64) -> Psi {
        Psi {
            x: self.x * k,
            y: self.y * k,
        }
    }
}

/// `psi` of a word.
pub fn psi(word: &[Symbol]) -> Psi {
    let mut p = Psi::ZERO;
    for &s in word {
        p.push(s);
    }
    p
}

/// The exact average `psi(J) / |J|` of a window `J`, kept unreduced.
///
/// Equality and ordering go through exact cross multiplication, so two
/// vectors with different window lengths compare as rationals.
#[derive(Debug, Clone, Copy)]
pub struct RotationVector {
    pub psi: Psi,
    pub len: u64,
}

impl RotationVector {
    pub fn new(psi: Psi, len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParams("empty window has no rotation vector".into()));
        }
        if psi.x + psi.y > len {
            return Err(Error::InvalidParams("psi exceeds window length".into()));
        }
        Ok(RotationVector { psi, len })
    }

    pub fn x(&self) -> BigRational {
        BigRational::new(BigInt::from(self.psi.x), BigInt::from(self.len))
    }

    pub fn y(&self) -> BigRational {
        BigRational::new(BigInt::from(self.psi.y), BigInt::from(self.len))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let l = self.len as f64;
        (self.psi.x as f64 / l, self.psi.y as f64 / l)
    }

    /// Reduced `(numerator, denominator)` of each coordinate.
    pub fn reduced(&self) -> ((u64, u64), (u64, u64)) {
        let rx = reduce(self.psi.x, self.len);
        let ry = reduce(self.psi.y, self.len);
        (rx, ry)
    }

    /// `x >= 0`, `y >= 0` and `x + y <= 1`.
    pub fn in_simplex(&self) -> bool {
        self.psi.x + self.psi.y <= self.len
    }
}

impl PartialEq for RotationVector {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.len as u128, other.len as u128);
        self.psi.x as u128 * b == other.psi.x as u128 * a
            && self.psi.y as u128 * b == other.psi.y as u128 * a
    }
}

impl Eq for RotationVector {}

impl fmt::Display for RotationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ((xn, xd), (yn, yd)) = self.reduced();
        write!(f, "({xn}/{xd}, {yn}/{yd})")
    }
}

fn reduce(num: u64, den: u64) -> (u64, u64) {
    let g = num_integer::gcd(num, den);
    if g == 0 {
        (0, 1)
    } else {
        (num / g, den / g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> alloc::vec::Vec<Symbol> {
        s.bytes().map(|c| Symbol::from_digit(c).unwrap()).collect()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&word("0")), Psi::new(0, 0));
        assert_eq!(psi(&word("112")), Psi::new(2, 1));
        assert_eq!(psi(&word("")), Psi::ZERO);
    }

    #[test]
    fn rho_of_word() {
        let w = word("0112");
        let r = RotationVector::new(psi(&w), w.len() as u64).unwrap();
        assert_eq!(r.reduced(), ((1, 2), (1, 4)));
        let twos = RotationVector::new(Psi::new(0, 9), 9).unwrap();
        assert_eq!(twos.reduced(), ((0, 1), (1, 1)));
        assert_eq!(twos, RotationVector::new(Psi::new(0, 1), 1).unwrap());
    }
}
