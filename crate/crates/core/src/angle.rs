//! Roots of unity `e(num / den)` kept as reduced fractions.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use num_integer::Integer;

/// `e(num / den) = exp(2 pi i num / den)` with `0 <= num < den` and
/// `gcd(num, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    num: u64,
    den: u64,
}

impl RationalAngle {
    pub const ZERO: Self = Self { num: 0, den: 1 };

    pub fn new(num: i128, den: u64) -> Self {
        assert!(den > 0, "angle denominator must be positive");
        let num = num.rem_euclid(den as i128) as u64;
        let g = num.gcd(&den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `e(num / den)^n`.
    pub fn scale(self, n: i128) -> Self {
        Self::new(self.num as i128 * n, self.den)
    }

    /// Fraction of a full turn in `[0, 1)`.
    pub fn turns(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_complex(&self) -> Complex64 {
        cis_turns(self.num, self.den)
    }
}

impl Add for RationalAngle {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let den = self.den.lcm(&rhs.den);
        let num =
            self.num as i128 * (den / self.den) as i128 + rhs.num as i128 * (den / rhs.den) as i128;
        Self::new(num, den)
    }
}

impl Neg for RationalAngle {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-(self.num as i128), self.den)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({}/{})", self.num, self.den)
    }
}

/// `exp(2 pi i num / den)` for an already reduced numerator `num < den`.
#[inline]
pub(crate) fn cis_turns(num: u64, den: u64) -> Complex64 {
    let (s, c) = (TAU * (num as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}
