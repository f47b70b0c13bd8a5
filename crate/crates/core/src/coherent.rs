//! Depth-truncated coherent sequences `(u_0, .., u_N)` in `Γ_Q`: `u_n` is
//! supported on `λ_i` with `i < p^n` and `ψ(u_{n+1}) = u_n`.
//!
//! Shifting a coherent sequence widens the support of entry `n` to
//! `p^{n+1}`; such sequences are handled as plain entry lists and split back
//! into `p` coherent slots by [`block_decompose`], using the direct sum
//! `Σ_k θ^n(λ_k) Γ_n` with `θ^n(λ_k) λ_t = λ_{kq+t}` (even `k`) or
//! `λ_{(k+1)q-1-t}` (odd `k`).

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gamma::GammaVec;
use crate::grid::GridFn;
use crate::prime::Prime;
use crate::rational::{q_int, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohSeq {
    p: Prime,
    entries: Vec<GammaVec>,
}

/// Entry `n` of `lambda_scale(k, ·)` or of a slot: the index `t < q` placed
/// in block `k`.
fn block_index(k: usize, q: usize, t: usize) -> usize {
    if k % 2 == 0 {
        k * q + t
    } else {
        (k + 1) * q - 1 - t
    }
}

impl CohSeq {
    /// Validates support and compatibility under `ψ`.
    pub fn new(p: Prime, entries: Vec<GammaVec>) -> Result<CohSeq> {
        if entries.is_empty() {
            return Err(Error::NotCoherent("a sequence needs at least entry 0".into()));
        }
        let mut q = 1usize;
        for (n, e) in entries.iter().enumerate() {
            if e.modulus() != p {
                return Err(Error::Mismatch(format!("entry {n} is over p = {}", e.modulus())));
            }
            if e.support_bound() > q {
                return Err(Error::NotCoherent(format!(
                    "entry {n} is supported at index {} >= {q}",
                    e.support_bound() - 1
                )));
            }
            if n > 0 && entries[n].psi() != entries[n - 1] {
                return Err(Error::NotCoherent(format!("ψ(u_{n}) differs from u_{}", n - 1)));
            }
            q *= p.as_usize();
        }
        Ok(CohSeq { p, entries })
    }

    pub fn zero(p: Prime, depth: u32) -> CohSeq {
        CohSeq { p, entries: vec![GammaVec::zero(p); depth as usize + 1] }
    }

    /// `(λ_0, λ_0, ..)`, the unit of the sequence product.
    pub fn one(p: Prime, depth: u32) -> CohSeq {
        CohSeq { p, entries: vec![GammaVec::one(p); depth as usize + 1] }
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn depth(&self) -> u32 {
        (self.entries.len() - 1) as u32
    }

    pub fn entries(&self) -> &[GammaVec] {
        &self.entries
    }

    pub fn entry(&self, n: usize) -> &GammaVec {
        &self.entries[n]
    }

    /// `α(u_0)`.
    pub fn alpha0(&self) -> Q {
        self.entries[0].alpha()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GammaVec::is_zero)
    }

    pub fn truncate(&self, depth: u32) -> Result<CohSeq> {
        if depth > self.depth() {
            return Err(Error::Invalid(format!(
                "cannot truncate depth {} to {depth}",
                self.depth()
            )));
        }
        Ok(CohSeq { p: self.p, entries: self.entries[..=depth as usize].to_vec() })
    }

    fn check_shape(&self, other: &CohSeq) -> Result<()> {
        if self.p != other.p || self.depth() != other.depth() {
            return Err(Error::Mismatch(format!(
                "sequences (p = {}, depth {}) and (p = {}, depth {})",
                self.p,
                self.depth(),
                other.p,
                other.depth()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &CohSeq) -> Result<CohSeq> {
        self.check_shape(other)?;
        let entries =
            self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(CohSeq { p: self.p, entries })
    }

    pub fn sub(&self, other: &CohSeq) -> Result<CohSeq> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> CohSeq {
        CohSeq { p: self.p, entries: self.entries.iter().map(|e| e.scale(c)).collect() }
    }

    /// `self + c Δ`.
    pub fn add_delta(&self, c: &Q) -> Result<CohSeq> {
        if c.is_zero() {
            return Ok(self.clone());
        }
        self.add(&delta_seq(self.p, self.depth()).scale(c))
    }

    /// Entrywise ring product.
    pub fn mul(&self, other: &CohSeq) -> Result<CohSeq> {
        self.check_shape(other)?;
        let entries =
            self.entries.iter().zip(&other.entries).map(|(a, b)| a.mul(b)).collect::<Result<_>>()?;
        Ok(CohSeq { p: self.p, entries })
    }

    /// `S(u) = (u_1, u_2, ..)`; entry `n` is supported below `p^{n+1}`.
    pub fn shift(&self) -> Result<Vec<GammaVec>> {
        if self.entries.len() < 2 {
            return Err(Error::Invalid("cannot shift a depth 0 sequence".into()));
        }
        Ok(self.entries[1..].to_vec())
    }

    /// `R(u)_n = (-1)^{p^n} λ_{p^n - 1} u_n`, using `λ_{q-1} λ_i = λ_{q-1-i}`.
    pub fn reflect(&self) -> CohSeq {
        let p = self.p.as_usize();
        let mut q = 1usize;
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let odd = q % 2 == 1;
            entries.push(GammaVec::from_pairs(
                self.p,
                e.terms().map(|(i, c)| (q - 1 - i, if odd { -c.clone() } else { c.clone() })),
            ));
            q *= p;
        }
        CohSeq { p: self.p, entries }
    }

    /// `(θ^n(λ_k) u_n)_n`, supported in `[k p^n, (k+1) p^n)`.
    pub fn lambda_scale(&self, k: usize) -> Result<Vec<GammaVec>> {
        let p = self.p.as_usize();
        if k >= p {
            return Err(Error::Invalid(format!("λ index {k} must be below p = {p}")));
        }
        let mut q = 1usize;
        let mut out = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            out.push(GammaVec::from_pairs(
                self.p,
                e.terms().map(|(t, c)| (block_index(k, q, t), c.clone())),
            ));
            q *= p;
        }
        Ok(out)
    }
}

/// `𝓛(φ)_n = Σ_{i<p^n} (φ((i+1)/p^n) - φ(i/p^n)) (-1)^i λ_i` for `n <= N`.
pub fn l_of(phi: &GridFn) -> CohSeq {
    let p = phi.modulus();
    let entries = (0..=phi.depth())
        .map(|n| {
            let g = phi.restrict(n).expect("n <= depth");
            GammaVec::from_pairs(
                p,
                g.values().windows(2).enumerate().map(|(i, w)| {
                    let d = &w[1] - &w[0];
                    (i, if i % 2 == 0 { d } else { -d })
                }),
            )
        })
        .collect();
    CohSeq { p, entries }
}

/// The grid `i/p^N ↦ α(δ_i u_N)`; inverts [`l_of`] on functions vanishing at 0.
///
/// Since `α(λ_j λ_k) = [j = k]`, `α(δ_i u_N) = Σ_{j<i} (-1)^j c_j` where
/// `c_j` are the coefficients of `u_N`.
pub fn fn_from_coherent(u: &CohSeq) -> Result<GridFn> {
    let u = CohSeq::new(u.p, u.entries.clone())?;
    let last = u.entry(u.depth() as usize);
    let q = u.p.pow(u.depth()).expect("validated");
    let mut values = Vec::with_capacity(q + 1);
    let mut acc = Q::zero();
    values.push(acc.clone());
    for j in 0..q {
        let c = last.coeff(j);
        if j % 2 == 0 {
            acc += c;
        } else {
            acc -= c;
        }
        values.push(acc.clone());
    }
    GridFn::new(u.p, u.depth(), values)
}

/// `Δ = (δ_1, p^{-1} δ_p, p^{-2} δ_{p^2}, ..) = 𝓛(t ↦ t)`.
pub fn delta_seq(p: Prime, depth: u32) -> CohSeq {
    let mut q = 1usize;
    let mut entries = Vec::with_capacity(depth as usize + 1);
    for _ in 0..=depth {
        entries.push(GammaVec::delta(p, q).scale(&(Q::one() / q_int(q as i64))));
        q *= p.as_usize();
    }
    CohSeq { p, entries }
}

/// Splits a shifted sequence `w` (entry `n` supported below `p^{n+1}`) into
/// the `p` coherent slots `v^(k)` with `w = Σ_k λ_k v^(k)`.
pub fn block_decompose(p: Prime, w: &[GammaVec]) -> Result<Vec<CohSeq>> {
    let pu = p.as_usize();
    let mut slots: Vec<Vec<GammaVec>> = vec![Vec::with_capacity(w.len()); pu];
    let mut q = 1usize;
    for (n, e) in w.iter().enumerate() {
        if e.support_bound() > q * pu {
            return Err(Error::Recombination(format!(
                "entry {n} is supported at {} >= {}",
                e.support_bound() - 1,
                q * pu
            )));
        }
        let mut parts: Vec<Vec<(usize, Q)>> = vec![Vec::new(); pu];
        for (i, c) in e.terms() {
            let k = i / q;
            let t = if k % 2 == 0 { i - k * q } else { (k + 1) * q - 1 - i };
            parts[k].push((t, c.clone()));
        }
        for (slot, part) in slots.iter_mut().zip(parts) {
            slot.push(GammaVec::from_pairs(p, part));
        }
        q *= pu;
    }
    let slots = slots
        .into_iter()
        .enumerate()
        .map(|(k, entries)| {
            CohSeq::new(p, entries)
                .map_err(|e| Error::NotCoherent(format!("slot {k} of the decomposition: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if recombine(p, &slots)? != w {
        return Err(Error::Recombination("slots do not sum back to the input".into()));
    }
    Ok(slots)
}

/// `Σ_k λ_k v^(k)`.
pub fn recombine(p: Prime, slots: &[CohSeq]) -> Result<Vec<GammaVec>> {
    let len = slots.first().map_or(0, |s| s.entries.len());
    let mut out = vec![GammaVec::zero(p); len];
    for (k, slot) in slots.iter().enumerate() {
        for (o, e) in out.iter_mut().zip(slot.lambda_scale(k)?) {
            *o = o.add(&e)?;
        }
    }
    Ok(out)
}

/// A witness for `v = b_j + cΔ` or `v = R(b_j) + cΔ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaMatch {
    pub index: usize,
    pub delta: Q,
    pub reflected: bool,
}

/// Finds `b_j` with `v - b_j` or `v - R(b_j)` in `QΔ`, comparing all entries
/// exactly. Two matches with different sequences are an error: at this depth
/// the candidates cannot be told apart.
pub fn delta_quotient_match(v: &CohSeq, basis: &[CohSeq]) -> Result<Option<DeltaMatch>> {
    let delta = delta_seq(v.p, v.depth());
    let mut found: Option<(DeltaMatch, CohSeq)> = None;
    for (j, b) in basis.iter().enumerate() {
        for reflected in [false, true] {
            let cand = if reflected { b.reflect() } else { b.clone() };
            let c = v.alpha0() - cand.alpha0();
            let shifted = cand.add(&delta.scale(&c))?;
            if shifted != *v {
                continue;
            }
            match &found {
                None => found = Some((DeltaMatch { index: j, delta: c, reflected }, cand)),
                Some((_, prev)) if *prev == cand => {}
                Some((m, _)) => {
                    return Err(Error::AmbiguousMatch(format!(
                        "slot matches member {} and member {j} at depth {}",
                        m.index,
                        v.depth()
                    )))
                }
            }
        }
    }
    Ok(found.map(|(m, _)| m))
}

#[derive(Serialize, Deserialize)]
struct CohSeqRepr {
    p: Prime,
    depth: u32,
    entries: Vec<String>,
}

impl Serialize for CohSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CohSeqRepr {
            p: self.p,
            depth: self.depth(),
            entries: self.entries.iter().map(ToString::to_string).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CohSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<CohSeq, D::Error> {
        use serde::de::Error as _;
        let r = CohSeqRepr::deserialize(d)?;
        if r.entries.len() != r.depth as usize + 1 {
            return Err(D::Error::custom("entry count does not match depth"));
        }
        let entries = r
            .entries
            .iter()
            .map(|t| GammaVec::parse(t, r.p))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        CohSeq::new(r.p, entries).map_err(D::Error::custom)
    }
}
