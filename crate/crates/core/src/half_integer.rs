//! Half-integer angular momentum values, stored exactly as twice the value.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// A spin, rank or projection quantum number `j` stored as `2j`,
/// so that 1/2 ↔ 1, 1 ↔ 2, 3/2 ↔ 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger {
    twice: i32,
}

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger { twice: 0 };
    pub const HALF: HalfInteger = HalfInteger { twice: 1 };
    pub const ONE: HalfInteger = HalfInteger { twice: 2 };

    /// Builds from the doubled value `2j`.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger { twice }
    }

    /// Builds from an integer value.
    pub const fn from_int(value: i32) -> Self {
        HalfInteger { twice: 2 * value }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// `j - other` is an integer, i.e. both are integers or both half-odd.
    pub const fn same_parity(self, other: HalfInteger) -> bool {
        (self.twice - other.twice) % 2 == 0
    }

    pub fn abs(self) -> HalfInteger {
        HalfInteger {
            twice: self.twice.abs(),
        }
    }

    /// The integer value, when this is an integer.
    pub fn as_integer(self) -> Option<i32> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    /// Multiplicity `2j + 1` of a spin-`j` multiplet.
    pub fn multiplicity(self) -> usize {
        debug_assert!(self.twice >= 0);
        (self.twice + 1) as usize
    }

    /// Projections `m = j, j-1, …, -j` in descending order.
    pub fn projections(self) -> impl Iterator<Item = HalfInteger> {
        let top = self.twice;
        (0..self.multiplicity() as i32).map(move |i| HalfInteger::from_twice(top - 2 * i))
    }
}

impl Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: HalfInteger) -> HalfInteger {
        HalfInteger {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: HalfInteger) -> HalfInteger {
        HalfInteger {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> HalfInteger {
        HalfInteger { twice: -self.twice }
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Parses "1/2", "3/2", "2", "-1/2". Only halves and integers are accepted;
/// decimal notation is rejected so that spins are never read through floats.
impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse = |v: &str| -> Result<i32, Error> {
            v.parse::<i32>()
                .map_err(|_| Error::InvalidSpin(s.to_string()))
        };
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(Error::InvalidSpin(s.to_string()));
            }
            Ok(HalfInteger::from_twice(parse(num.trim())?))
        } else {
            Ok(HalfInteger::from_int(parse(s)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("1/2".parse::<HalfInteger>().unwrap().twice(), 1);
        assert_eq!("3/2".parse::<HalfInteger>().unwrap().twice(), 3);
        assert_eq!("2".parse::<HalfInteger>().unwrap().twice(), 4);
        assert_eq!("-1/2".parse::<HalfInteger>().unwrap().twice(), -1);
        assert!("0.3".parse::<HalfInteger>().is_err());
        assert!("1/3".parse::<HalfInteger>().is_err());
        assert_eq!(HalfInteger::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfInteger::from_int(2).to_string(), "2");
    }

    #[test]
    fn projections_descend() {
        let ms: Vec<i32> = HalfInteger::from_twice(3)
            .projections()
            .map(|m| m.twice())
            .collect();
        assert_eq!(ms, vec![3, 1, -1, -3]);
    }

    #[test]
    fn multiplicity() {
        assert_eq!(HalfInteger::HALF.multiplicity(), 2);
        assert_eq!(HalfInteger::from_int(2).multiplicity(), 5);
    }
}
