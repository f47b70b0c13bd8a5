//! Rational functions `N(z)/D(z)` over `Q` that are power series at `z = 0`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qpoly::QPoly;
use crate::rational::{parse_q, Q};

/// Always reduced: numerator and denominator coprime, `D(0) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: QPoly,
    den: QPoly,
}

impl RatFunc {
    pub fn new(num: QPoly, den: QPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::Invalid("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.exact_div(&g).expect("gcd divides"), den.exact_div(&g).expect("gcd divides"))
        };
        let c0 = den.coeff(0);
        if c0.is_zero() {
            return Err(Error::Invalid(format!(
                "({num})/({den}) has a pole at z = 0 and is not a power series"
            )));
        }
        let inv = Q::one() / c0;
        Ok(RatFunc { num: num.scale(&inv), den: den.scale(&inv) })
    }

    pub fn from_poly(num: QPoly) -> RatFunc {
        RatFunc { num, den: QPoly::one() }
    }

    pub fn from_ints(num: &[i64], den: &[i64]) -> Result<RatFunc> {
        RatFunc::new(QPoly::from_ints(num), QPoly::from_ints(den))
    }

    pub fn zero() -> RatFunc {
        RatFunc::from_poly(QPoly::zero())
    }

    pub fn one() -> RatFunc {
        RatFunc::from_poly(QPoly::one())
    }

    pub fn numerator(&self) -> &QPoly {
        &self.num
    }

    pub fn denominator(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
        .expect("denominators have nonzero constant terms")
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("denominators have nonzero constant terms")
    }

    /// `self / other`; fails if the result is not a power series.
    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::Invalid("division by zero".into()));
        }
        RatFunc::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        RatFunc::new(self.num.scale(c), self.den.clone()).expect("same denominator")
    }

    /// The first `n` power-series coefficients.
    pub fn taylor(&self, n: usize) -> Vec<Q> {
        // D(0) = 1, so a_k = N_k - Σ_{j>=1} D_j a_{k-j}.
        let mut out: Vec<Q> = Vec::with_capacity(n);
        for k in 0..n {
            let mut a = self.num.coeff(k);
            for j in 1..=k.min(self.den.coeffs().len().saturating_sub(1)) {
                a -= self.den.coeff(j) * &out[k - j];
            }
            out.push(a);
        }
        out
    }

    /// The value at `z`, or `None` at a pole.
    pub fn eval(&self, z: &Q) -> Option<Q> {
        let d = self.den.eval(z);
        (!d.is_zero()).then(|| self.num.eval(z) / d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Coefficients serialize as JSON integers when integral, `"a/b"` otherwise.
fn coeff_json(c: &Q) -> serde_json::Value {
    if c.is_integer() {
        if let Ok(n) = c.numer().to_string().parse::<i64>() {
            return serde_json::Value::from(n);
        }
    }
    serde_json::Value::String(crate::rational::fmt_q(c))
}

fn coeff_from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|i| Q::from_integer(i.into()))
            .ok_or_else(|| Error::Parse(format!("coefficient {n} is not an integer"))),
        serde_json::Value::String(s) => parse_q(s),
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

#[derive(Serialize, Deserialize)]
struct RatFuncRepr {
    numerator: Vec<serde_json::Value>,
    denominator: Vec<serde_json::Value>,
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RatFuncRepr {
            numerator: self.num.coeffs().iter().map(coeff_json).collect(),
            denominator: self.den.coeffs().iter().map(coeff_json).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<RatFunc, D::Error> {
        use serde::de::Error as _;
        let r = RatFuncRepr::deserialize(d)?;
        let parse = |v: &[serde_json::Value]| -> Result<QPoly> {
            Ok(QPoly::new(v.iter().map(coeff_from_json).collect::<Result<_>>()?))
        };
        let num = parse(&r.numerator).map_err(D::Error::custom)?;
        let den = parse(&r.denominator).map_err(D::Error::custom)?;
        RatFunc::new(num, den).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};

    #[test]
    fn normalization() {
        let a = RatFunc::new(QPoly::from_ints(&[2, 72]), QPoly::from_ints(&[2, -4])).unwrap();
        assert_eq!(a, RatFunc::from_ints(&[1, 36], &[1, -2]).unwrap());
        let common = QPoly::from_ints(&[1, -27]);
        let b = RatFunc::new(
            QPoly::from_ints(&[1, 36]).mul(&common),
            QPoly::from_ints(&[1, -2]).mul(&common),
        )
        .unwrap();
        assert_eq!(b, a);
        assert!(RatFunc::from_ints(&[1], &[0, 1]).is_err());
    }

    #[test]
    fn series_coefficients() {
        let h = RatFunc::from_ints(&[1, 36], &[1, -29, 54]).unwrap();
        let t = h.taylor(3);
        assert_eq!(t, vec![q_int(1), q_int(65), q_int(1831)]);
        let g = RatFunc::from_ints(&[1], &[1, -1, -1]).unwrap();
        let fib: Vec<Q> = [1, 1, 2, 3, 5, 8].iter().map(|&v| q_int(v)).collect();
        assert_eq!(g.taylor(6), fib);
    }

    #[test]
    fn field_operations() {
        let a = RatFunc::from_ints(&[1, 36], &[1, -2]).unwrap();
        let b = RatFunc::from_ints(&[1], &[1, -27]).unwrap();
        let ab = a.mul(&b);
        assert_eq!(ab, RatFunc::from_ints(&[1, 36], &[1, -29, 54]).unwrap());
        assert_eq!(ab.div(&b).unwrap(), a);
        assert_eq!(a.add(&b).sub(&b), a);
        assert_eq!(a.eval(&q_frac(1, 2)), None);
        assert_eq!(b.eval(&q_int(0)), Some(q_int(1)));
    }

    #[test]
    fn json_round_trip() {
        let h = RatFunc::new(QPoly::new(vec![q_int(1), q_frac(1, 3)]), QPoly::from_ints(&[1, -27]))
            .unwrap();
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"numerator":[1,"1/3"],"denominator":[1,-27]}"#);
        assert_eq!(serde_json::from_str::<RatFunc>(&json).unwrap(), h);
        assert_eq!(h.to_string(), "(1+1/3z)/(1-27z)");
    }
}
