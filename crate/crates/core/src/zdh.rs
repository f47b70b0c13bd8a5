//! `e_n` for `g = z^D - h(x, y)`, and the exact fit of
//! `e_n = μ p^{2n} - μ₁ r_n (E - r_n) p^n + ρ_n` with `ρ_n` eventually periodic.
//!
//! Write `D = p^c E` with `p ∤ E`, and for `n >= c`, `p^{n-c} = s_n E + r_n`.
//! Then `e_n = p^c ((E - r_n) c(h^{s_n}) + r_n c(h^{s_n + 1}))`, where `c(·)`
//! is the bivariate colength at `q = p^n`.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colength::{colength_with, DenseLimit};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::prime::Prime;
use crate::rational::{serde_q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZDInput {
    p: Prime,
    d: u64,
    h: Poly,
    c: u32,
    e: u64,
    /// User assertion that `E` divides no exponent in the factorization of
    /// `h`; the fit must then give `μ₁ = 0`.
    pub e_avoids_exponents: bool,
}

impl ZDInput {
    pub fn new(d: u64, h: Poly) -> Result<ZDInput> {
        if d == 0 {
            return Err(Error::Invalid("D must be positive".into()));
        }
        if h.nvars() != 2 {
            return Err(Error::Invalid(format!("h must be bivariate, got {} variables", h.nvars())));
        }
        if h.is_zero() || h.constant_term() != 0 {
            return Err(Error::Invalid("h must be nonzero with zero constant term".into()));
        }
        let p = h.modulus();
        let c = p.valuation(d);
        let e = d / (p.get() as u64).pow(c);
        Ok(ZDInput { p, d, h, c, e, e_avoids_exponents: false })
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn h(&self) -> &Poly {
        &self.h
    }

    /// `v_p(D)`.
    pub fn c(&self) -> u32 {
        self.c
    }

    /// `D / p^c`.
    pub fn e(&self) -> u64 {
        self.e
    }

    /// `(s_n, r_n)` with `p^{n-c} = s_n E + r_n`.
    pub fn split(&self, n: u32) -> Result<(u64, u64)> {
        if n < self.c {
            return Err(Error::Invalid(format!("n = {n} is below c = {}", self.c)));
        }
        let pow = (self.p.get() as u64)
            .checked_pow(n - self.c)
            .ok_or_else(|| Error::SizeLimit(format!("{}^{} overflows", self.p, n - self.c)))?;
        Ok((pow / self.e, pow % self.e))
    }

    /// The multiplicative order of `p` modulo `E`: the period of `r_n`.
    pub fn r_period(&self) -> u32 {
        let p = self.p.get() as u64 % self.e;
        let mut x = p % self.e;
        let mut k = 1;
        while self.e > 1 && x != 1 {
            x = x * p % self.e;
            k += 1;
        }
        k
    }

    /// `z^D - h` in variables `x, y, z`.
    pub fn to_poly(&self) -> Result<Poly> {
        let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let d = u32::try_from(self.d).map_err(|_| Error::SizeLimit(format!("D = {}", self.d)))?;
        let z = Poly::from_terms(self.p, vars.clone(), [(vec![0, 0, d], 1)])?;
        z.sub(&self.h.embed(&vars, 0)?)
    }
}

pub fn en_zd(input: &ZDInput, n: u32) -> Result<u64> {
    en_zd_with(input, n, DenseLimit::default())
}

pub fn en_zd_with(input: &ZDInput, n: u32, limit: DenseLimit) -> Result<u64> {
    let (s, r) = input.split(n)?;
    let q = input
        .p
        .pow(n)
        .ok_or_else(|| Error::SizeLimit(format!("{}^{n} overflows", input.p)))?;
    let pc = (input.p.get() as u64).pow(input.c);
    let lo = if r < input.e { colength_with(q, &input.h.pow_trunc(s, q), limit)? } else { 0 };
    let hi = if r > 0 { colength_with(q, &input.h.pow_trunc(s + 1, q), limit)? } else { 0 };
    Ok(pc * ((input.e - r) * lo + r * hi))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZDFit {
    #[serde(with = "serde_q")]
    pub mu: Q,
    #[serde(with = "serde_q")]
    pub mu1: Q,
    /// `(n, e_n)` over the computed range.
    pub values: Vec<(u32, u64)>,
    /// `(n, ρ_n)` with `ρ_n = e_n - μ p^{2n} + μ₁ r_n (E - r_n) p^n`.
    #[serde(with = "serde_tail")]
    pub tail: Vec<(u32, Q)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub period: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preperiod: Option<u32>,
}

mod serde_tail {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(t: &[(u32, Q)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(t.iter().map(|(n, r)| (n, fmt_q(r))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(u32, Q)>, D::Error> {
        Vec::<(u32, String)>::deserialize(d)?
            .into_iter()
            .map(|(n, r)| Ok((n, parse_q(&r).map_err(serde::de::Error::custom)?)))
            .collect()
    }
}

fn qpow(p: Prime, n: u32) -> Q {
    Q::from_integer(num_bigint::BigInt::from(p.get()).pow(n))
}

/// Smallest `(preperiod, period)` with `ρ_{n+period} = ρ_n` for all `n >=
/// preperiod` in range, covering at least two full cycles.
fn find_period(tail: &[(u32, Q)]) -> Option<(u32, u32)> {
    let len = tail.len();
    for start in 0..len {
        for period in 1..=(len - start) / 2 {
            if (start..len - period).all(|i| tail[i].1 == tail[i + period].1) {
                return Some((tail[start].0, period as u32));
            }
        }
    }
    None
}

/// Fits `μ, μ₁` exactly. Pairs `(n, n + L)` with `L` the period of `r_n`
/// share `r_n`; assuming `ρ_n` is already periodic there, each pair gives a
/// linear equation free of `ρ`. The two highest pairs are solved exactly and
/// every other pair is used as a check.
pub fn fit_mu(input: &ZDInput, n_lo: u32, n_hi: u32) -> Result<ZDFit> {
    fit_mu_with(input, n_lo, n_hi, DenseLimit::default())
}

pub fn fit_mu_with(input: &ZDInput, n_lo: u32, n_hi: u32, limit: DenseLimit) -> Result<ZDFit> {
    if n_lo < input.c {
        return Err(Error::Invalid(format!("n_lo = {n_lo} is below c = {}", input.c)));
    }
    if n_hi < n_lo + 3 {
        return Err(Error::Invalid(format!("need n_hi - n_lo >= 3, got [{n_lo}, {n_hi}]")));
    }
    let values: Vec<(u32, u64)> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| Ok((n, en_zd_with(input, n, limit)?)))
        .collect::<Result<_>>()?;
    let p = input.p;
    let e = Q::from_integer(input.e.into());
    let weight = |n: u32| -> Result<Q> {
        let (_, r) = input.split(n)?;
        let r = Q::from_integer(r.into());
        Ok(&r * (&e - &r))
    };
    let ev = |n: u32| Q::from_integer(values[(n - n_lo) as usize].1.into());

    // Row for the pair (n, n+L): [p^{2(n+L)} - p^{2n}, -w_n (p^{n+L} - p^n)] · (μ, μ₁) = e_{n+L} - e_n.
    let l = input.r_period();
    let mut rows: Vec<(u32, [Q; 2], Q)> = Vec::new();
    for n in (n_lo..=n_hi).take_while(|n| n + l <= n_hi) {
        let m = n + l;
        let w = weight(n)?;
        let a = qpow(p, 2 * m) - qpow(p, 2 * n);
        let b = -(w * (qpow(p, m) - qpow(p, n)));
        rows.push((n, [a, b], ev(m) - ev(n)));
    }

    let (mu, mu1) = if input.e == 1 {
        let (_, [a, _], rhs) = rows.last().ok_or_else(|| {
            Error::ShapeRejected("no pair of indices with equal r_n in range".into())
        })?;
        (rhs / a, Q::zero())
    } else {
        if rows.len() < 2 {
            return Err(Error::ShapeRejected(format!(
                "r_n has period {l}; the range [{n_lo}, {n_hi}] needs at least {} values",
                l + 2
            )));
        }
        let (_, [a1, b1], r1) = &rows[rows.len() - 2];
        let (_, [a2, b2], r2) = &rows[rows.len() - 1];
        let det = a1 * b2 - a2 * b1;
        if det.is_zero() {
            return Err(Error::ShapeRejected(
                "the top two pairs do not determine μ and μ₁".into(),
            ));
        }
        ((r1 * b2 - r2 * b1) / &det, (a1 * r2 - a2 * r1) / det)
    };
    if !mu.is_positive() {
        return Err(Error::ShapeRejected(format!("fitted μ = {mu} is not positive")));
    }
    if input.e_avoids_exponents && !mu1.is_zero() {
        return Err(Error::ShapeRejected(format!(
            "E divides no exponent of h, but the fit gives μ₁ = {mu1}"
        )));
    }

    let tail: Vec<(u32, Q)> = values
        .iter()
        .map(|&(n, en)| {
            let rho = Q::from_integer(en.into()) - &mu * qpow(p, 2 * n)
                + &mu1 * weight(n)? * qpow(p, n);
            Ok((n, rho))
        })
        .collect::<Result<_>>()?;
    // The pairs solved exactly are consistent by construction; any other
    // pair past the preperiod must agree as well.
    let period_info = find_period(&tail);
    if let Some((pre, _)) = period_info {
        for (n, [a, b], rhs) in &rows {
            if *n >= pre && &mu * a + &mu1 * b != *rhs {
                return Err(Error::ShapeRejected(format!(
                    "pair ({n}, {}) contradicts the fitted μ = {mu}, μ₁ = {mu1}",
                    n + l
                )));
            }
        }
    }
    Ok(ZDFit {
        mu,
        mu1,
        values,
        tail,
        period: period_info.map(|x| x.1),
        preperiod: period_info.map(|x| x.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colength::direct_en;
    use crate::rational::{q_frac, q_int};

    fn input(d: u64, h: &str) -> ZDInput {
        let p = Prime::new(7).unwrap();
        ZDInput::new(d, Poly::parse(h, p, &["x", "y"]).unwrap()).unwrap()
    }

    #[test]
    fn split_and_period() {
        let g = input(14, "x^6*y^6*(x^2-y^2)");
        assert_eq!((g.c(), g.e()), (1, 2));
        assert_eq!(g.split(3).unwrap(), (24, 1));
        assert_eq!(g.r_period(), 1);
        let g = input(5, "x^5*y^4");
        assert_eq!(g.r_period(), 4);
        assert!(g.split(0).is_ok());
    }

    #[test]
    fn agrees_with_dense_colength() {
        for (d, h) in [(14, "x^6*y^6*(x^2-y^2)"), (5, "x^5*y^4"), (7, "x^2*y+y^3"), (3, "x*y")] {
            let g = input(d, h);
            let n = g.c().max(1);
            let direct = direct_en(&g.to_poly().unwrap(), n, DenseLimit::default()).unwrap();
            assert_eq!(en_zd(&g, n).unwrap(), direct, "z^{d} - {h}");
        }
    }

    #[test]
    fn e_one_scales_by_p_squared() {
        let g = input(7, "x^2*y+y^3");
        let e1 = en_zd(&g, 1).unwrap();
        let e2 = en_zd(&g, 2).unwrap();
        let e3 = en_zd(&g, 3).unwrap();
        assert_eq!(e2, 49 * e1);
        assert_eq!(e3, 49 * e2);
        let fit = fit_mu(&g, 1, 4).unwrap();
        assert_eq!(fit.mu1, q_int(0));
        assert_eq!(fit.mu, q_frac(e1 as i64, 49));
    }

    #[test]
    fn second_example() {
        let g = input(14, "x^6*y^6*(x^2-y^2)");
        assert_eq!(en_zd(&g, 2).unwrap(), 25046);
        assert_eq!(en_zd(&g, 3).unwrap(), 1241618);
        let fit = fit_mu(&g, 1, 4).unwrap();
        assert_eq!(fit.mu, q_frac(74, 7));
        assert_eq!(fit.mu1, q_int(6));
        assert_eq!(fit.preperiod, Some(2));
        assert_eq!(fit.period, Some(1));
        assert_eq!(fit.tail[1], (2, q_int(-42)));
    }
}
