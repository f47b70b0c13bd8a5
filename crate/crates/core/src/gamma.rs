//! The representation ring `Γ_Q` of finite `F_p[T]`-modules with nilpotent
//! `T`, in the basis `λ_n = (-1)^n (δ_{n+1} - δ_n)`.
//!
//! Products are computed by the dilation decomposition: every `λ_a` with
//! `a < p^{n+1}` factors as `θ^n(λ_A) λ_B` with `A < p` and `B < p^n`, so a
//! product of two vectors supported below `p^{n+1}` is
//!
//! ```text
//! u v = Σ_{A,C} θ^n(λ_A λ_C) · (U_A V_C)
//! ```
//!
//! where `U_A, V_C` are supported below `p^n` and the outer products only
//! involve indices below `p`. The recursion bottoms out at the small-index
//! rule `λ_i λ_j = Σ_{k=j-i}^{min(i+j, 2p-2-i-j)} λ_k` for `i <= j < p`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::colength::ColengthTable;
use crate::error::{Error, Result};
use crate::prime::Prime;
use crate::rational::{parse_q, q_int, Q};

/// Largest basis index any operation will create or accept.
pub const MAX_INDEX: usize = 1_000_000;

#[derive(Clone, PartialEq, Eq)]
pub struct GammaVec {
    modulus: Prime,
    coeffs: BTreeMap<usize, Q>,
}

fn check_index(i: usize) -> Result<()> {
    if i > MAX_INDEX {
        return Err(Error::IndexBound(i));
    }
    Ok(())
}

impl GammaVec {
    pub fn zero(p: Prime) -> GammaVec {
        GammaVec { modulus: p, coeffs: BTreeMap::new() }
    }

    pub fn lambda(p: Prime, i: usize) -> GammaVec {
        GammaVec::from_pairs(p, [(i, Q::one())])
    }

    /// The unit `λ_0 = δ_1`.
    pub fn one(p: Prime) -> GammaVec {
        GammaVec::lambda(p, 0)
    }

    /// `δ_n = Σ_{i<n} (-1)^i λ_i`.
    pub fn delta(p: Prime, n: usize) -> GammaVec {
        GammaVec::from_pairs(p, (0..n).map(|i| (i, q_int(if i % 2 == 0 { 1 } else { -1 }))))
    }

    /// Sums repeated indices and drops zeros.
    pub fn from_pairs(p: Prime, pairs: impl IntoIterator<Item = (usize, Q)>) -> GammaVec {
        let mut out = GammaVec::zero(p);
        for (i, c) in pairs {
            out.add_term(i, c);
        }
        out
    }

    pub fn from_ints(p: Prime, coeffs: &[i64]) -> GammaVec {
        GammaVec::from_pairs(p, coeffs.iter().enumerate().map(|(i, &c)| (i, q_int(c))))
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Q)> + '_ {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// One past the largest index with a nonzero coefficient.
    pub fn support_bound(&self) -> usize {
        self.coeffs.keys().next_back().map_or(0, |&i| i + 1)
    }

    pub fn add_term(&mut self, i: usize, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(i).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    fn check_same(&self, other: &GammaVec) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::Mismatch(format!(
                "Γ vectors over p = {} and p = {}",
                self.modulus, other.modulus
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &GammaVec) -> Result<GammaVec> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&i, c) in &other.coeffs {
            out.add_term(i, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GammaVec) -> Result<GammaVec> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GammaVec {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> GammaVec {
        if c.is_zero() {
            return GammaVec::zero(self.modulus);
        }
        GammaVec {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|(&i, v)| (i, v * c)).collect(),
        }
    }

    /// The coefficient of `λ_0`.
    pub fn alpha(&self) -> Q {
        self.coeff(0)
    }

    /// `θ(λ_i) = λ_{pi}` for even `i`, `λ_{pi+p-1}` for odd `i`.
    pub fn theta(&self) -> Result<GammaVec> {
        self.theta_pow(1)
    }

    /// `θ^n`, which sends `λ_i` to `λ_{iq}` (even `i`) or `λ_{(i+1)q-1}` (odd
    /// `i`) with `q = p^n`.
    pub fn theta_pow(&self, n: u32) -> Result<GammaVec> {
        let q = self.modulus.pow(n).ok_or(Error::IndexBound(usize::MAX))?;
        let mut out = GammaVec::zero(self.modulus);
        for (&i, c) in &self.coeffs {
            let j = dilate(i, q).ok_or(Error::IndexBound(usize::MAX))?;
            check_index(j)?;
            out.coeffs.insert(j, c.clone());
        }
        Ok(out)
    }

    /// `ψ(λ_{pr+k}) = (-1)^{pr+k+r} λ_r`.
    pub fn psi(&self) -> GammaVec {
        let p = self.modulus.as_usize();
        let mut out = GammaVec::zero(self.modulus);
        for (&i, c) in &self.coeffs {
            let (r, k) = (i / p, i % p);
            let sign = (p * r + k + r) % 2 == 0;
            out.add_term(r, if sign { c.clone() } else { -c.clone() });
        }
        out
    }

    /// Ring product.
    pub fn mul(&self, other: &GammaVec) -> Result<GammaVec> {
        self.check_same(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(GammaVec::zero(self.modulus));
        }
        let p = self.modulus.as_usize();
        let bound = self.support_bound().max(other.support_bound());
        check_index(bound - 1)?;
        let mut len = p;
        while len < bound {
            len *= p;
        }
        check_index(len - 1)?;
        let u = self.to_dense(len);
        let v = other.to_dense(len);
        let w = mul_dense(p, &small_table(p), &u, &v);
        Ok(GammaVec::from_dense(self.modulus, w))
    }

    fn to_dense(&self, len: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); len];
        for (&i, c) in &self.coeffs {
            out[i] = c.clone();
        }
        out
    }

    fn from_dense(p: Prime, v: Vec<Q>) -> GammaVec {
        GammaVec {
            modulus: p,
            coeffs: v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Parses the form produced by `Display`, e.g. `"8*L0 - 1*L1"` or `"1/9*L2"`.
    pub fn parse(text: &str, p: Prime) -> Result<GammaVec> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" || compact.is_empty() {
            return Ok(GammaVec::zero(p));
        }
        let mut out = GammaVec::zero(p);
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'-' => (true, &rest[1..]),
                b'+' => (false, &rest[1..]),
                _ => (false, rest),
            };
            let end = body[1..].find(['+', '-']).map_or(body.len(), |e| e + 1);
            let term = &body[..end];
            rest = &body[end..];
            let (coef, index) = match term.split_once("*L") {
                Some((c, i)) => (parse_q(c)?, i),
                None => match term.strip_prefix('L') {
                    Some(i) => (Q::one(), i),
                    None => return Err(Error::Parse(format!("bad Γ term {term:?}"))),
                },
            };
            let index: usize =
                index.parse().map_err(|_| Error::Parse(format!("bad Γ index in {term:?}")))?;
            check_index(index)?;
            out.add_term(index, if neg { -coef } else { coef });
        }
        Ok(out)
    }
}

/// Index map of `θ^n` with `q = p^n`.
pub(crate) fn dilate(i: usize, q: usize) -> Option<usize> {
    if i % 2 == 0 {
        i.checked_mul(q)
    } else {
        (i + 1).checked_mul(q).map(|v| v - 1)
    }
}

/// `λ_i λ_j` for `i, j < p`, as the list of indices with coefficient one.
pub(crate) fn small_product(p: usize, i: usize, j: usize) -> std::ops::RangeInclusive<usize> {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let hi = (i + j).min(2 * p - 2 - i - j);
    (j - i)..=hi
}

fn small_table(p: usize) -> Vec<Vec<std::ops::RangeInclusive<usize>>> {
    (0..p).map(|i| (0..p).map(|j| small_product(p, i, j)).collect()).collect()
}

/// Product of dense vectors of equal length `p^m` (`m >= 1`).
fn mul_dense(
    p: usize,
    table: &[Vec<std::ops::RangeInclusive<usize>>],
    u: &[Q],
    v: &[Q],
) -> Vec<Q> {
    let len = u.len();
    let mut out = vec![Q::zero(); len];
    if len == 1 {
        out[0] = &u[0] * &v[0];
        return out;
    }
    if len == p {
        for (i, a) in u.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in v.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let c = a * b;
                for k in table[i][j].clone() {
                    out[k] += &c;
                }
            }
        }
        return out;
    }
    let q = len / p;
    let blocks = |w: &[Q]| -> Vec<Option<Vec<Q>>> {
        (0..p)
            .map(|a| {
                let src = &w[a * q..(a + 1) * q];
                if src.iter().all(Zero::is_zero) {
                    return None;
                }
                let mut blk = src.to_vec();
                if a % 2 == 1 {
                    blk.reverse();
                }
                Some(blk)
            })
            .collect()
    };
    let ub = blocks(u);
    let vb = blocks(v);
    for (a, ua) in ub.iter().enumerate() {
        let Some(ua) = ua else { continue };
        for (c, vc) in vb.iter().enumerate() {
            let Some(vc) = vc else { continue };
            let w = mul_dense(p, table, ua, vc);
            for k in table[a][c].clone() {
                let base = k * q;
                if k % 2 == 0 {
                    for (t, x) in w.iter().enumerate() {
                        if !x.is_zero() {
                            out[base + t] += x;
                        }
                    }
                } else {
                    for (t, x) in w.iter().enumerate() {
                        if !x.is_zero() {
                            out[base + q - 1 - t] += x;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `⟨f⟩_n = Σ_{i<q} (c_{i+1} - c_i)(-1)^i λ_i` from a colength table at `q = p^n`.
pub fn bracket(p: Prime, n: u32, table: &ColengthTable) -> Result<GammaVec> {
    let q = p.pow(n).ok_or(Error::IndexBound(usize::MAX))?;
    if table.q != q {
        return Err(Error::Mismatch(format!("table at q = {} but n = {n} needs q = {q}", table.q)));
    }
    let inc = table.increments()?;
    Ok(GammaVec::from_pairs(
        p,
        inc.into_iter()
            .enumerate()
            .map(|(i, d)| (i, q_int(if i % 2 == 0 { d } else { -d }))),
    ))
}

impl fmt::Display for GammaVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (i, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            let mag = if mag.is_integer() { mag.numer().to_string() } else { mag.to_string() };
            match (n, c.is_negative()) {
                (0, false) => write!(f, "{mag}*L{i}")?,
                (0, true) => write!(f, "-{mag}*L{i}")?,
                (_, false) => write!(f, " + {mag}*L{i}")?,
                (_, true) => write!(f, " - {mag}*L{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GammaVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GammaVec[p={}]({self})", self.modulus)
    }
}

/// Serialized form: `{"p": 3, "terms": "8*L0 - 1*L1"}`.
#[derive(Serialize, Deserialize)]
struct GammaRepr {
    p: Prime,
    terms: String,
}

impl Serialize for GammaVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GammaRepr { p: self.modulus, terms: self.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GammaVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<GammaVec, D::Error> {
        let r = GammaRepr::deserialize(d)?;
        GammaVec::parse(&r.terms, r.p).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use proptest::prelude::*;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    fn lam(p: u64, i: usize) -> GammaVec {
        GammaVec::lambda(pr(p), i)
    }

    fn ints(p: u64, c: &[i64]) -> GammaVec {
        GammaVec::from_ints(pr(p), c)
    }

    #[test]
    fn delta_expansion() {
        assert!(GammaVec::delta(pr(3), 0).is_zero());
        assert_eq!(GammaVec::delta(pr(3), 1), lam(3, 0));
        assert_eq!(GammaVec::delta(pr(3), 3), ints(3, &[1, -1, 1]));
    }

    #[test]
    fn basis_products() {
        for j in 0..=10 {
            assert_eq!(lam(3, 0).mul(&lam(3, j)).unwrap(), lam(3, j));
        }
        assert_eq!(lam(3, 1).mul(&lam(3, 1)).unwrap(), ints(3, &[1, 1, 1]));
        assert_eq!(lam(3, 2).mul(&lam(3, 2)).unwrap(), lam(3, 0));
        assert_eq!(lam(3, 3).mul(&lam(3, 3)).unwrap(), ints(3, &[1, 0, 0, 0, 0, 1, 1]));
        assert_eq!(lam(7, 1).mul(&lam(7, 2)).unwrap(), ints(7, &[0, 1, 1, 1]));
    }

    #[test]
    fn theta_and_psi_on_basis() {
        assert_eq!(lam(3, 0).theta().unwrap(), lam(3, 0));
        assert_eq!(lam(3, 1).theta().unwrap(), lam(3, 5));
        assert_eq!(lam(3, 2).theta().unwrap(), lam(3, 6));
        assert_eq!(lam(3, 0).psi(), lam(3, 0));
        assert_eq!(lam(3, 4).psi(), lam(3, 1).neg());
        assert_eq!(lam(3, 5).psi(), lam(3, 1));
    }

    #[test]
    fn alpha_values() {
        assert_eq!(ints(3, &[1, -1]).alpha(), q_int(1));
        for n in 1..10 {
            assert_eq!(GammaVec::delta(pr(5), n).alpha(), q_int(1));
        }
    }

    #[test]
    fn alpha_is_orthonormal_on_lambda() {
        for p in [2, 3, 5, 7] {
            for i in 0..=40 {
                for j in 0..=40 {
                    let a = lam(p, i).mul(&lam(p, j)).unwrap().alpha();
                    assert_eq!(a, q_int((i == j) as i64), "p={p} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn bracket_of_example_curve() {
        let f = Poly::parse("y^3-x^4+x^2*y^2", pr(3), &["x", "y"]).unwrap();
        let t = crate::colength::colength_table(3, &f, 3).unwrap();
        assert_eq!(bracket(pr(3), 1, &t).unwrap(), ints(3, &[8, -1]));
        let t0 = crate::colength::colength_table(1, &f, 1).unwrap();
        assert_eq!(bracket(pr(3), 0, &t0).unwrap(), lam(3, 0));
        assert!(matches!(bracket(pr(3), 1, &t0), Err(Error::Mismatch(_))));
    }

    #[test]
    fn bracket_of_sum_is_product() {
        let p = pr(7);
        let f = Poly::parse("x^3+y^4", p, &["x", "y"]).unwrap();
        let t = crate::colength::colength_table(7, &f, 7).unwrap();
        let zeta = ints(7, &[3, -3, 1]);
        let eta = ints(7, &[4, -3]);
        assert_eq!(bracket(p, 1, &t).unwrap(), zeta.mul(&eta).unwrap());
        assert_eq!(bracket(p, 1, &t).unwrap(), ints(7, &[21, -15, 10, -3]));
    }

    #[test]
    fn display_and_parse_round_trip() {
        let v = GammaVec::from_pairs(pr(3), [(0, q_int(8)), (1, q_int(-1)), (4, Q::new(1.into(), 9.into()))]);
        assert_eq!(v.to_string(), "8*L0 - 1*L1 + 1/9*L4");
        assert_eq!(GammaVec::parse(&v.to_string(), pr(3)).unwrap(), v);
        assert_eq!(GammaVec::parse("-L2+3*L0", pr(3)).unwrap(), ints(3, &[3, 0, -1]));
        assert_eq!(GammaVec::parse("0", pr(3)).unwrap(), GammaVec::zero(pr(3)));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<GammaVec>(&json).unwrap(), v);
    }

    #[test]
    fn index_bound_rejected() {
        assert!(matches!(lam(7, 2_000_000).mul(&lam(7, 1)), Err(Error::IndexBound(_))));
        assert!(lam(7, 500_000).theta().is_err());
    }

    fn arb_vec(p: u64, max_index: usize) -> impl Strategy<Value = GammaVec> {
        proptest::collection::vec((0..=max_index, -3i64..=3), 1..6)
            .prop_map(move |t| GammaVec::from_pairs(pr(p), t.into_iter().map(|(i, c)| (i, q_int(c)))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn commutative_and_associative(
            (u, v, w) in prop::sample::select(vec![2u64, 3, 5, 7])
                .prop_flat_map(|p| (arb_vec(p, 60), arb_vec(p, 60), arb_vec(p, 60)))
        ) {
            prop_assert_eq!(u.mul(&v).unwrap(), v.mul(&u).unwrap());
            prop_assert_eq!(u.mul(&v).unwrap().mul(&w).unwrap(), u.mul(&v.mul(&w).unwrap()).unwrap());
        }

        #[test]
        fn theta_is_multiplicative(u in arb_vec(3, 30), v in arb_vec(3, 30)) {
            prop_assert_eq!(u.mul(&v).unwrap().theta().unwrap(), u.theta().unwrap().mul(&v.theta().unwrap()).unwrap());
        }

        #[test]
        fn psi_is_multiplicative(u in arb_vec(5, 60), v in arb_vec(5, 60)) {
            prop_assert_eq!(u.mul(&v).unwrap().psi(), u.psi().mul(&v.psi()).unwrap());
        }
    }
}
