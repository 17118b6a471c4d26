//! Dyadic rationals `num / 2^exp`, the coordinate system for punctures and
//! probe geometry. Everything stays exact: comparisons cross-multiply by
//! shifts, and parsing/printing round-trips bit-for-bit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A nonnegative dyadic rational, kept normalized (odd numerator or exp 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u64,
    exp: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DyadicParseError {
    #[error("empty dyadic literal")]
    Empty,
    #[error("invalid integer in dyadic literal: {0}")]
    BadInt(String),
    #[error("denominator {0} is not a power of two")]
    NotPowerOfTwo(u64),
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// `num / 2^exp`, normalized.
    pub fn new(num: u64, exp: u8) -> Dyadic {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    /// 2^-exp.
    pub fn half_pow(exp: u8) -> Dyadic {
        Dyadic::new(1, exp)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn exponent(&self) -> u8 {
        self.exp
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64
    }

    /// Numerator after rescaling to denominator 2^exp. Panics if the value
    /// cannot be represented at that scale (coarser than its own exponent).
    pub fn scaled_num(&self, exp: u8) -> u64 {
        assert!(exp >= self.exp, "dyadic {self} not representable at 2^-{exp}");
        self.num << (exp - self.exp)
    }

    /// Index of the grid cell of side 2^-k containing this value, clamping
    /// the right endpoint 1.0 into the last cell. Values exactly on a cell
    /// edge land in the cell to their right (floor convention).
    pub fn cell_at(&self, k: u8) -> u32 {
        let side = 1u64 << k;
        let idx = if self.exp <= k {
            (self.num as u128) << (k - self.exp)
        } else {
            (self.num as u128) >> (self.exp - k)
        };
        (idx.min((side - 1) as u128)) as u32
    }

    pub fn mul_pow2(&self, shift: i8) -> Dyadic {
        if shift >= 0 {
            Dyadic::new(self.num << shift as u8, self.exp)
        } else {
            Dyadic::new(self.num, self.exp + (-shift) as u8)
        }
    }

    pub fn add(&self, other: Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        Dyadic::new(self.scaled_num(exp) + other.scaled_num(exp), exp)
    }

    pub fn sub(&self, other: Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let (a, b) = (self.scaled_num(exp), other.scaled_num(exp));
        assert!(a >= b, "dyadic subtraction underflow");
        Dyadic::new(a - b, exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = (self.num as u128) << (exp - self.exp);
        let b = (other.num as u128) << (exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u64 << self.exp)
        }
    }
}

impl FromStr for Dyadic {
    type Err = DyadicParseError;

    /// Accepts `3/16` (power-of-two denominator) or a bare integer `1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(DyadicParseError::Empty);
        }
        match s.split_once('/') {
            None => {
                let n: u64 = s.parse().map_err(|_| DyadicParseError::BadInt(s.into()))?;
                Ok(Dyadic::new(n, 0))
            }
            Some((num, den)) => {
                let n: u64 = num
                    .trim()
                    .parse()
                    .map_err(|_| DyadicParseError::BadInt(num.into()))?;
                let d: u64 = den
                    .trim()
                    .parse()
                    .map_err(|_| DyadicParseError::BadInt(den.into()))?;
                if d == 0 || !d.is_power_of_two() {
                    return Err(DyadicParseError::NotPowerOfTwo(d));
                }
                Ok(Dyadic::new(n, d.trailing_zeros() as u8))
            }
        }
    }
}

/// A puncture location: a dyadic point in the open unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl DyadicPoint {
    pub fn new(x: Dyadic, y: Dyadic) -> DyadicPoint {
        DyadicPoint { x, y }
    }

    /// Containing cell (col, row) at resolution k.
    pub fn cell_at(&self, k: u8) -> (u32, u32) {
        (self.x.cell_at(k), self.y.cell_at(k))
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_display() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(4, 3).to_string(), "1/2");
        assert_eq!(Dyadic::new(0, 7), Dyadic::ZERO);
        assert_eq!(Dyadic::new(3, 0).to_string(), "3");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1/2", "3/16", "0", "1", "5/8", "11/2048"] {
            let d: Dyadic = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("".parse::<Dyadic>().is_err());
    }

    #[test]
    fn ordering_is_exact() {
        let a = Dyadic::new(1, 1); // 1/2
        let b = Dyadic::new(255, 9); // 255/512
        assert!(b < a);
        assert!(a > b);
        assert_eq!(a.cmp(&a), Ordering::Equal);
    }

    #[test]
    fn cell_indexing_floor_convention() {
        let half = Dyadic::new(1, 1);
        // exactly on the edge between cells 7 and 8 at k=4 -> right cell
        assert_eq!(half.cell_at(4), 8);
        assert_eq!(Dyadic::ONE.cell_at(4), 15); // clamped into the last cell
        assert_eq!(Dyadic::new(3, 5).cell_at(4), 1); // 3/32 in cell 1
    }

    #[test]
    fn arithmetic() {
        let a = Dyadic::new(1, 2);
        let b = Dyadic::new(1, 3);
        assert_eq!(a.add(b), Dyadic::new(3, 3));
        assert_eq!(a.sub(b), Dyadic::new(1, 3));
        assert_eq!(a.mul_pow2(-1), Dyadic::new(1, 3));
    }
}
