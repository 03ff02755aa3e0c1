//! Residues modulo N and small number-theoretic helpers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A residue class `value mod modulus`, always stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicIndex {
    value: usize,
    modulus: usize,
}

impl CyclicIndex {
    pub fn new(value: i64, modulus: usize) -> Result<Self> {
        check_modulus(modulus)?;
        let m = modulus as i64;
        Ok(Self {
            value: value.rem_euclid(m) as usize,
            modulus,
        })
    }

    /// Builds a residue from an already reduced value.
    pub fn from_reduced(value: usize, modulus: usize) -> Result<Self> {
        check_modulus(modulus)?;
        if value >= modulus {
            return Err(Error::param(format!(
                "residue {value} not in [0, {modulus})"
            )));
        }
        Ok(Self { value, modulus })
    }

    pub fn value(self) -> usize {
        self.value
    }

    pub fn modulus(self) -> usize {
        self.modulus
    }

    fn assert_same(self, other: Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "residues from different moduli"
        );
    }
}

impl fmt::Display for CyclicIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl Add for CyclicIndex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.assert_same(rhs);
        Self {
            value: (self.value + rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Sub for CyclicIndex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.assert_same(rhs);
        Self {
            value: (self.value + self.modulus - rhs.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

impl Mul for CyclicIndex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.assert_same(rhs);
        Self {
            value: mul_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl Neg for CyclicIndex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

pub(crate) fn check_modulus(modulus: usize) -> Result<()> {
    if modulus < 2 {
        Err(Error::InvalidModulus(modulus))
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn mul_mod(a: usize, b: usize, m: usize) -> usize {
    ((a as u128 * b as u128) % m as u128) as usize
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Checks the `N prime >= 5` hypothesis shared by the discrete bounds.
pub(crate) fn require_prime_ge5(n: usize) -> Result<()> {
    if n < 5 || !is_prime(n as u64) {
        Err(Error::param(format!("N must be prime >= 5 (got {n})")))
    } else {
        Ok(())
    }
}
