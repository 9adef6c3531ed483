//! Exact half-integer angular momenta, stored as doubled values.

use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A half-integer quantum number `j`, stored as `2j` so that values like
/// 1/2 and 3/2 stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };
    pub const THREE_HALVES: HalfInt = HalfInt { twice: 3 };

    pub fn from_doubled(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn doubled(self) -> i32 {
        self.twice
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// True if `m` is a valid projection of this angular momentum:
    /// |m| <= j and j - m integer.
    pub fn admits_projection(self, m: HalfInt) -> bool {
        m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    /// Triangle condition |j1 - j2| <= self <= j1 + j2 with integer perimeter.
    pub fn couples(self, j1: HalfInt, j2: HalfInt) -> bool {
        self.twice >= (j1.twice - j2.twice).abs()
            && self.twice <= j1.twice + j2.twice
            && (j1.twice + j2.twice + self.twice) % 2 == 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}
