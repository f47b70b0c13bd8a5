use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime `p` with `2 <= p <= 97`; primality is checked on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if !(2..=97).contains(&p) || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::BadPrime(p));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// `p^n` as a `usize`, or `None` on overflow.
    pub fn pow(self, n: u32) -> Option<usize> {
        (self.0 as usize).checked_pow(n)
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.0 != 0);
        let p = self.0 as u64;
        let mut result = 1u64;
        let mut base = a as u64 % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        result as u32
    }

    /// `n` if `q = p^n`, else `None`.
    pub fn log(self, q: usize) -> Option<u32> {
        let mut n = 0;
        let mut acc = 1usize;
        while acc < q {
            acc = acc.checked_mul(self.0 as usize)?;
            n += 1;
        }
        (acc == q).then_some(n)
    }

    /// The `p`-adic valuation of a positive integer.
    pub fn valuation(self, mut m: u64) -> u32 {
        assert!(m > 0);
        let mut v = 0;
        while m % self.0 as u64 == 0 {
            m /= self.0 as u64;
            v += 1;
        }
        v
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Prime> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0 as u64
    }
}

impl std::fmt::Display for Prime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
