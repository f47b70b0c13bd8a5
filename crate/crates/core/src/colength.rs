//! Colength of `(x_1^q, .., x_s^q, f)`: the `F_p`-dimension of
//! `F_p[x]/(x_1^q, .., x_s^q, f)`.
//!
//! Two algorithms are provided. The dense one computes `q^s - rank(M_f)`
//! where `M_f` is multiplication by `f` on the monomial basis of
//! `F_p[x]/(x^q)`. The structured one handles homogeneous bivariate `f`: the
//! syzygy module of `(x^q, y^q, f)` is free of rank two, generated in degrees
//! `m1 <= m2` with `m1 + m2 = 2q + d`, and
//!
//! ```text
//! colength = (2q^2 + 4qd - 2q^2 - d^2 + (m2 - m1)^2) / 4.
//! ```
//!
//! `m1` is found from the extended Euclidean remainder sequence of `t^q` and
//! `f(t, 1) mod t^q`, which enumerates the minimal solutions of
//! `c(t) C(t) = L(t) mod t^q`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::prime::Prime;

/// Largest `q^s` the dense algorithm accepts when no limit is configured.
pub const DEFAULT_DENSE_LIMIT: usize = 10_000;
/// The dense limit may not be configured above this.
pub const DENSE_HARD_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseLimit(usize);

impl DenseLimit {
    pub fn new(limit: usize) -> Result<DenseLimit> {
        if limit > DENSE_HARD_CAP {
            return Err(Error::SizeLimit(format!(
                "dense limit {limit} exceeds the hard cap {DENSE_HARD_CAP}"
            )));
        }
        Ok(DenseLimit(limit))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for DenseLimit {
    fn default() -> Self {
        DenseLimit(DEFAULT_DENSE_LIMIT)
    }
}

/// Which algorithm [`colength_with`] selects for an input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// `f = 0` or `f` a unit.
    Trivial,
    Univariate,
    HomogeneousBivariate,
    Dense,
}

/// `c_a = colength(q, f^a)` for `0 <= a <= amax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColengthTable {
    pub q: usize,
    pub f: Poly,
    pub values: Vec<u64>,
}

impl ColengthTable {
    pub fn amax(&self) -> usize {
        self.values.len() - 1
    }

    /// Increments `c_{i+1} - c_i` for `i < q`.
    pub fn increments(&self) -> Result<Vec<i64>> {
        if self.values.len() < self.q + 1 {
            return Err(Error::TableTooShort { need: self.q, have: self.amax() });
        }
        Ok((0..self.q)
            .map(|i| self.values[i + 1] as i64 - self.values[i] as i64)
            .collect())
    }
}

fn qs(q: usize, s: usize) -> Result<usize> {
    q.checked_pow(s as u32)
        .ok_or_else(|| Error::SizeLimit(format!("{q}^{s} overflows")))
}

pub fn strategy(q: usize, f: &Poly, limit: DenseLimit) -> Result<Strategy> {
    if f.is_zero() || f.is_unit() {
        return Ok(Strategy::Trivial);
    }
    if f.nvars() == 1 {
        return Ok(Strategy::Univariate);
    }
    if f.nvars() == 2 && f.homogeneous_degree().is_some() {
        return Ok(Strategy::HomogeneousBivariate);
    }
    let size = qs(q, f.nvars())?;
    if size <= limit.get() {
        return Ok(Strategy::Dense);
    }
    Err(Error::SizeLimit(format!(
        "q^s = {size} exceeds the dense limit {} and no structured algorithm applies to {f}",
        limit.get()
    )))
}

fn check_q(q: usize, p: Prime) -> Result<()> {
    if p.log(q).is_none() {
        return Err(Error::Invalid(format!("{q} is not a power of {p}")));
    }
    Ok(())
}

/// Colength with the default dense limit.
pub fn colength(q: usize, f: &Poly) -> Result<u64> {
    colength_with(q, f, DenseLimit::default())
}

pub fn colength_with(q: usize, f: &Poly, limit: DenseLimit) -> Result<u64> {
    check_q(q, f.modulus())?;
    match strategy(q, f, limit)? {
        Strategy::Trivial => {
            if f.is_zero() {
                Ok(qs(q, f.nvars())? as u64)
            } else {
                Ok(0)
            }
        }
        Strategy::Univariate => {
            let order = f.terms().map(|(m, _)| m.0[0] as usize).min().unwrap_or(q);
            Ok(order.min(q) as u64)
        }
        Strategy::HomogeneousBivariate => Ok(colength_homogeneous(q, f)),
        Strategy::Dense => Ok(colength_dense(q, f)),
    }
}

/// `colength(q, f^a)` for every `a <= amax`. Entries are computed
/// independently (in parallel); the result equals [`colength_table_sequential`].
pub fn colength_table(q: usize, f: &Poly, amax: usize) -> Result<ColengthTable> {
    colength_table_with(q, f, amax, DenseLimit::default())
}

pub fn colength_table_with(
    q: usize,
    f: &Poly,
    amax: usize,
    limit: DenseLimit,
) -> Result<ColengthTable> {
    check_q(q, f.modulus())?;
    if amax > 2 * q {
        return Err(Error::Invalid(format!("amax {amax} exceeds 2q = {}", 2 * q)));
    }
    strategy(q, f, limit)?;
    let values = (0..=amax)
        .into_par_iter()
        .map(|a| colength_with(q, &f.pow_trunc(a as u64, q), limit))
        .collect::<Result<Vec<u64>>>()?;
    Ok(ColengthTable { q, f: f.clone(), values })
}

pub fn colength_table_sequential(
    q: usize,
    f: &Poly,
    amax: usize,
    limit: DenseLimit,
) -> Result<ColengthTable> {
    check_q(q, f.modulus())?;
    if amax > 2 * q {
        return Err(Error::Invalid(format!("amax {amax} exceeds 2q = {}", 2 * q)));
    }
    let values = (0..=amax)
        .map(|a| colength_with(q, &f.pow_trunc(a as u64, q), limit))
        .collect::<Result<Vec<u64>>>()?;
    Ok(ColengthTable { q, f: f.clone(), values })
}

/// `e_n(f)` by dense rank over `F_p`, with no structural shortcuts.
pub fn direct_en(f: &Poly, n: u32, limit: DenseLimit) -> Result<u64> {
    let q = f
        .modulus()
        .pow(n)
        .ok_or_else(|| Error::SizeLimit(format!("{}^{n} overflows", f.modulus())))?;
    let size = qs(q, f.nvars())?;
    if size > limit.get() {
        return Err(Error::SizeLimit(format!(
            "q^s = {size} exceeds the dense limit {}",
            limit.get()
        )));
    }
    Ok(colength_dense(q, f))
}

/// `q^s - rank(M_f)` by sparse-row Gaussian elimination over `F_p`.
pub fn colength_dense(q: usize, f: &Poly) -> u64 {
    let s = f.nvars();
    let n = q.pow(s as u32);
    let p = f.modulus().get();
    let f = f.truncate(q);
    if f.is_zero() {
        return n as u64;
    }
    // Monomial index: mixed radix q, first variable least significant.
    let terms: Vec<(Vec<usize>, u32)> =
        f.terms().map(|(m, c)| (m.0.iter().map(|&e| e as usize).collect(), c)).collect();
    let mut strides = vec![1usize; s];
    for i in 1..s {
        strides[i] = strides[i - 1] * q;
    }
    let mut echelon = Echelon::new(n, p);
    let mut exps = vec![0usize; s];
    let mut row: Vec<(usize, u32)> = Vec::new();
    for idx in 0..n {
        let mut rem = idx;
        for e in exps.iter_mut() {
            *e = rem % q;
            rem /= q;
        }
        row.clear();
        for (te, c) in &terms {
            let mut target = 0;
            let mut ok = true;
            for i in 0..s {
                let e = exps[i] + te[i];
                if e >= q {
                    ok = false;
                    break;
                }
                target += e * strides[i];
            }
            if ok {
                row.push((target, *c));
            }
        }
        echelon.insert(&row);
    }
    (n - echelon.rank()) as u64
}

/// Row echelon form over `F_p` with sparse stored rows and a dense scratch
/// accumulator.
pub(crate) struct Echelon {
    p: u32,
    pivots: Vec<Option<Vec<(usize, u32)>>>,
    scratch: Vec<u32>,
    rank: usize,
}

impl Echelon {
    pub(crate) fn new(ncols: usize, p: u32) -> Echelon {
        Echelon { p, pivots: vec![None; ncols], scratch: vec![0; ncols], rank: 0 }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Reduces `row` (pairs of column and residue, any order) and stores it
    /// if independent. Returns whether the rank grew.
    pub(crate) fn insert(&mut self, row: &[(usize, u32)]) -> bool {
        let p = self.p;
        let mut lo = usize::MAX;
        let mut hi = 0;
        for &(j, c) in row {
            self.scratch[j] = (self.scratch[j] + c) % p;
            lo = lo.min(j);
            hi = hi.max(j);
        }
        if lo == usize::MAX {
            return false;
        }
        let mut j = lo;
        while j <= hi {
            let v = self.scratch[j];
            if v != 0 {
                match &self.pivots[j] {
                    Some(pr) => {
                        // Pivot rows are monic at their first entry.
                        let factor = p - v;
                        for &(k, c) in pr {
                            self.scratch[k] = (self.scratch[k] + factor * c) % p;
                            hi = hi.max(k);
                        }
                    }
                    None => {
                        let inv = Prime::new(p as u64).map(|pp| pp.inv(v)).unwrap_or(1);
                        let mut stored = Vec::new();
                        for k in j..=hi {
                            let c = self.scratch[k];
                            if c != 0 {
                                stored.push((k, c * inv % p));
                                self.scratch[k] = 0;
                            }
                        }
                        self.pivots[j] = Some(stored);
                        self.rank += 1;
                        return true;
                    }
                }
            }
            j += 1;
        }
        false
    }
}

/// Homogeneous bivariate colength via the syzygy-gap formula.
pub fn colength_homogeneous(q: usize, f: &Poly) -> u64 {
    assert_eq!(f.nvars(), 2);
    let p = f.modulus().get();
    if f.is_zero() {
        return (q * q) as u64;
    }
    let d = f.homogeneous_degree().expect("homogeneous input") as i64;
    if d == 0 {
        return 0;
    }
    let qi = q as i64;
    // c(t) = f(t, 1) mod t^q: coefficient of x^i y^(d-i) at t^i.
    let mut c = vec![0u32; q];
    for (m, v) in f.terms() {
        let i = m.0[0] as usize;
        if i < q && (m.0[1] as usize) < q {
            c[i] = (c[i] + v) % p;
        }
    }
    trim(&mut c);
    let k_min = min_syzygy_cofactor_degree(q, &c, d, p);
    let m1 = (2 * qi).min(d + k_min);
    let m2 = 2 * qi + d - m1;
    let delta = m2 - m1;
    let num = 2 * qi * qi + 4 * qi * d - 2 * qi * qi - d * d + delta * delta;
    debug_assert!(num % 4 == 0 && num >= 0);
    (num / 4) as u64
}

/// Smallest `k` such that some nonzero `C` of degree `<= k` has `c C` free of
/// coefficients in the window `[k + d - q + 1, q - 1]`.
fn min_syzygy_cofactor_degree(q: usize, c: &[u32], d: i64, p: u32) -> i64 {
    let qi = q as i64;
    // Beyond this the window is shorter than the number of unknowns.
    let by_count = if 2 * qi - d - 2 < 0 { 0 } else { (2 * qi - d - 2) / 2 + 1 };
    let mut best = by_count;
    // Remainder sequence r_{-1} = t^q, r_0 = c, with cofactors t_{-1} = 0, t_0 = 1.
    let mut r_prev = vec![0u32; q + 1];
    r_prev[q] = 1;
    let mut r_cur = c.to_vec();
    let mut t_prev: Vec<u32> = Vec::new();
    let mut t_cur: Vec<u32> = vec![1];
    loop {
        let dt = degree_of(&t_cur);
        let cand = match deg(&r_cur) {
            None => dt,
            Some(dr) => dt.max(dr as i64 + qi - d),
        }
        .max(0);
        best = best.min(cand);
        if r_cur.is_empty() || dt >= best {
            break;
        }
        let (quot, rem) = divrem(&r_prev, &r_cur, p);
        let t_next = sub(&t_prev, &mul(&quot, &t_cur, p), p);
        r_prev = std::mem::replace(&mut r_cur, rem);
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    best
}

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn deg(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
    trim(&mut out);
    out
}

fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u32; a.len().max(b.len())];
    for (i, v) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *v = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

fn divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let db = deg(b).expect("division by zero polynomial");
    let inv = Prime::new(p as u64).unwrap().inv(b[db]);
    let mut rem = a.to_vec();
    trim(&mut rem);
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u32; rem.len() - db];
    while let Some(dr) = deg(&rem) {
        if dr < db {
            break;
        }
        let coef = (rem[dr] as u64 * inv as u64 % p as u64) as u32;
        quot[dr - db] = coef;
        for (j, &bj) in b[..=db].iter().enumerate() {
            let idx = dr - db + j;
            rem[idx] = ((rem[idx] as u64 + (p - coef) as u64 * bj as u64) % p as u64) as u32;
        }
        trim(&mut rem);
    }
    trim(&mut quot);
    (quot, rem)
}

fn degree_of(a: &[u32]) -> i64 {
    deg(a).map(|d| d as i64).unwrap_or(-1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn prime(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn poly(text: &str, p: u64) -> Poly {
        Poly::parse(text, prime(p), &["x", "y"]).unwrap()
    }

    #[test]
    fn example_curve_values() {
        assert_eq!(colength(3, &poly("y^3-x^4+x^2*y^2", 3)).unwrap(), 8);
        assert_eq!(colength(3, &poly("x*y*(x+y)", 3)).unwrap(), 7);
        assert_eq!(colength(5, &poly("1", 5)).unwrap(), 0);
        assert_eq!(colength(5, &poly("0", 5)).unwrap(), 25);
    }

    #[test]
    fn cusp_at_q7() {
        // x^3 + y^4 is not homogeneous; q^2 = 49 is within the dense limit.
        let f = poly("x^3+y^4", 7);
        assert_eq!(strategy(7, &f, DenseLimit::default()).unwrap(), Strategy::Dense);
        assert_eq!(colength(7, &f).unwrap(), 21);
    }

    #[test]
    fn table_values() {
        let t = colength_table(3, &poly("y^3-x^4+x^2*y^2", 3), 3).unwrap();
        assert_eq!(t.values, vec![0, 8, 9, 9]);
        let t = colength_table(1, &poly("x^2+x*y", 5), 2).unwrap();
        assert_eq!(t.values, vec![0, 1, 1]);
        let t = colength_table(7, &poly("x^4+x*y^3", 7), 4).unwrap();
        assert_eq!(t.values, vec![0, 25, 40, 48, 49]);
    }

    #[test]
    fn direct_en_small_cases() {
        let f = poly("y^3-x^4+x^2*y^2", 3);
        assert_eq!(direct_en(&f, 0, DenseLimit::default()).unwrap(), 1);
        assert_eq!(direct_en(&f, 1, DenseLimit::default()).unwrap(), 8);
        assert!(matches!(
            direct_en(&f, 5, DenseLimit::default()),
            Err(Error::SizeLimit(_))
        ));
        assert!(DenseLimit::new(200_000).is_err());
    }

    #[test]
    fn homogeneous_path_matches_dense() {
        let mut rng = rand_chacha_like(11);
        for p in [2u64, 3, 5, 7] {
            for _ in 0..12 {
                let d: u32 = rng.gen_range(1..7);
                let terms: Vec<(Vec<u32>, i64)> = (0..=d)
                    .map(|i| (vec![i, d - i], rng.gen_range(0..p as i64)))
                    .collect();
                let f = Poly::from_terms(prime(p), vec!["x".into(), "y".into()], terms).unwrap();
                let mut q = 1;
                while q * q <= 2500 {
                    assert_eq!(
                        colength_homogeneous(q, &f),
                        colength_dense(q, &f),
                        "p={p} q={q} f={f}"
                    );
                    q *= p as usize;
                }
            }
        }
    }

    #[test]
    fn homogeneous_powers_match_dense() {
        let f = poly("x*y*(x+y)", 3);
        for a in 0..=18 {
            let fa = f.pow_trunc(a, 27);
            let fa_full = f.pow(a);
            assert_eq!(colength_homogeneous(27, &fa_full), colength_dense(27, &fa), "a={a}");
        }
    }

    #[test]
    fn monotone_and_saturating() {
        let f = poly("y^3-x^4+x^2*y^2", 3);
        for q in [1usize, 3, 9] {
            let t = colength_table(q, &f, 2 * q).unwrap();
            assert_eq!(t.values[0], 0);
            assert!(t.values.windows(2).all(|w| w[0] <= w[1]));
            assert!(t.values.iter().all(|&v| v <= (q * q) as u64));
            assert_eq!(t.values[q], (q * q) as u64);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let f = poly("y^3-x^4+x^2*y^2", 3);
        let a = colength_table(9, &f, 18).unwrap();
        let b = colength_table_sequential(9, &f, 18, DenseLimit::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_path_matches_staircase_count_on_random_bivariate() {
        // Independent path: count standard monomials of a lex Groebner basis
        // built by the Buchberger routine in the test helper below.
        let mut rng = rand_chacha_like(5);
        for trial in 0..20 {
            let p = [2u64, 3, 5, 7][trial % 4];
            let q = if p == 2 { [2usize, 4, 8][trial % 3] } else { [p as usize, (p * p) as usize][trial % 2] };
            if q > 9 {
                continue;
            }
            let nterms = rng.gen_range(1..5);
            let terms: Vec<(Vec<u32>, i64)> = (0..nterms)
                .map(|_| {
                    let a = rng.gen_range(0..5);
                    let b = rng.gen_range(0..5);
                    let (a, b) = if a + b == 0 { (1, 0) } else { (a, b) };
                    (vec![a, b], rng.gen_range(1..p as i64))
                })
                .collect();
            let f = Poly::from_terms(prime(p), vec!["x".into(), "y".into()], terms).unwrap();
            let expected = groebner_oracle::colength(q, &f);
            assert_eq!(colength_dense(q, &f), expected, "p={p} q={q} f={f}");
        }
    }

    fn rand_chacha_like(seed: u64) -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(seed)
    }

    /// Buchberger's algorithm for bivariate ideals `(x^q, y^q, f)` over
    /// `F_p`, lex order with `x > y`; counts standard monomials.
    mod groebner_oracle {
        use std::collections::BTreeMap;

        use crate::poly::Poly;
        use crate::prime::Prime;

        type P = BTreeMap<(u32, u32), u32>;

        fn lead(f: &P) -> Option<((u32, u32), u32)> {
            f.iter().next_back().map(|(m, c)| (*m, *c))
        }

        fn add_scaled(f: &mut P, g: &P, shift: (u32, u32), c: u32, p: u32) {
            for (m, v) in g {
                let key = (m.0 + shift.0, m.1 + shift.1);
                let e = f.entry(key).or_insert(0);
                *e = (*e + c * v) % p;
                if *e == 0 {
                    f.remove(&key);
                }
            }
        }

        fn reduce(mut f: P, basis: &[P], pp: Prime) -> P {
            let p = pp.get();
            let mut out = P::new();
            while let Some((m, c)) = lead(&f) {
                let divisor = basis.iter().find(|g| {
                    let (gm, _) = lead(g).unwrap();
                    gm.0 <= m.0 && gm.1 <= m.1
                });
                match divisor {
                    Some(g) => {
                        let (gm, gc) = lead(g).unwrap();
                        let factor = (p - c) * pp.inv(gc) % p;
                        add_scaled(&mut f, g, (m.0 - gm.0, m.1 - gm.1), factor, p);
                    }
                    None => {
                        out.insert(m, c);
                        f.remove(&m);
                    }
                }
            }
            out
        }

        pub fn colength(q: usize, f: &Poly) -> u64 {
            let pp = f.modulus();
            let p = pp.get();
            let q = q as u32;
            let mut basis: Vec<P> = vec![
                [((q, 0), 1)].into_iter().collect(),
                [((0, q), 1)].into_iter().collect(),
            ];
            let fp: P = f.terms().map(|(m, c)| ((m.0[0], m.0[1]), c)).collect();
            let r = reduce(fp, &basis, pp);
            if !r.is_empty() {
                basis.push(r);
            }
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for i in 0..basis.len() {
                for j in 0..i {
                    pairs.push((j, i));
                }
            }
            while let Some((i, j)) = pairs.pop() {
                let (mi, ci) = lead(&basis[i]).unwrap();
                let (mj, cj) = lead(&basis[j]).unwrap();
                let l = (mi.0.max(mj.0), mi.1.max(mj.1));
                let mut s = P::new();
                add_scaled(&mut s, &basis[i], (l.0 - mi.0, l.1 - mi.1), pp.inv(ci), p);
                add_scaled(&mut s, &basis[j], (l.0 - mj.0, l.1 - mj.1), p - pp.inv(cj), p);
                let r = reduce(s, &basis, pp);
                if !r.is_empty() {
                    let k = basis.len();
                    basis.push(r);
                    for i in 0..k {
                        pairs.push((i, k));
                    }
                }
            }
            let leads: Vec<(u32, u32)> = basis.iter().map(|g| lead(g).unwrap().0).collect();
            let mut count = 0;
            for a in 0..q {
                for b in 0..q {
                    if !leads.iter().any(|m| m.0 <= a && m.1 <= b) {
                        count += 1;
                    }
                }
            }
            count
        }
    }
}
