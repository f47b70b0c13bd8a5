//! Dense univariate polynomials over `Q`, coefficients in ascending order.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{q_int, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Vec<Q>);

impl QPoly {
    pub fn new(mut coeffs: Vec<Q>) -> QPoly {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> QPoly {
        QPoly::new(coeffs.iter().map(|&c| q_int(c)).collect())
    }

    pub fn zero() -> QPoly {
        QPoly(Vec::new())
    }

    pub fn one() -> QPoly {
        QPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> QPoly {
        QPoly::new(vec![c])
    }

    /// `a + b z`.
    pub fn linear(a: Q, b: Q) -> QPoly {
        QPoly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.0.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &Q) -> QPoly {
        QPoly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dj) in d.0.iter().enumerate() {
                    rem[k + j] -= &c * dj;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// `self / d`, or `None` if the division leaves a remainder.
    pub fn exact_div(&self, d: &QPoly) -> Option<QPoly> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&(Q::one() / lead))
    }

    pub fn eval(&self, z: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * z + c)
    }

    /// `self(cz)`.
    pub fn compose_scale(&self, c: &Q) -> QPoly {
        let mut pow = Q::one();
        let mut out = Vec::with_capacity(self.0.len());
        for x in &self.0 {
            out.push(x * &pow);
            pow *= c;
        }
        QPoly::new(out)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag_s = if mag.is_integer() { mag.numer().to_string() } else { mag.to_string() };
            let body = match (i, mag.is_one()) {
                (0, _) => mag_s,
                (1, true) => "z".to_string(),
                (1, false) => format!("{mag_s}z"),
                (_, true) => format!("z^{i}"),
                (_, false) => format!("{mag_s}z^{i}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}
