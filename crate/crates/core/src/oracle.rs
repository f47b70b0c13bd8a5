//! Brute-force products in `Γ`: realise `δ_m` as the Jordan block
//! `F_p[T]/(T^m)` and decompose `F_p[T]/(T^m) ⊗ F_p[T]/(T^n)` under
//! `T ⊗ 1 + 1 ⊗ T`.
//!
//! The operator raises the grading `i + j` of `e_i ⊗ e_j` by one, so the
//! tensor product is a graded `F_p[T]`-module and its Jordan blocks are the
//! bars of the chain `V_0 → V_1 → ...` of graded pieces. The bars are found by
//! the usual elder-rule reduction: images of older classes are processed
//! first, and a class whose image becomes dependent dies.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gamma::GammaVec;
use crate::prime::Prime;
use crate::rational::Q;

/// Largest basis index accepted by [`oracle_mul`].
pub const ORACLE_MAX_INDEX: usize = 60;

/// Jordan block sizes of `J_m ⊗ J_n` with multiplicities, sorted by size.
pub fn tensor_jordan_type(p: Prime, m: usize, n: usize) -> Vec<(usize, usize)> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize, usize), Vec<(usize, usize)>>>> =
        OnceLock::new();
    let (m, n) = if m <= n { (m, n) } else { (n, m) };
    let key = (p.get(), m, n);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let result = compute_jordan_type(p.get(), m, n);
    cache.lock().unwrap().insert(key, result.clone());
    result
}

fn compute_jordan_type(p: u32, m: usize, n: usize) -> Vec<(usize, usize)> {
    let mut bars: HashMap<usize, usize> = HashMap::new();
    if m == 0 || n == 0 {
        return Vec::new();
    }
    // Piece d is spanned by e_i ⊗ e_{d-i}; local coordinate i - lo(d).
    let lo = |d: usize| d.saturating_sub(n - 1);
    let hi = |d: usize| d.min(m - 1);
    let top = m + n - 2;
    // Live classes in piece d: (birth, coordinates), a basis of V_d.
    let mut live: Vec<(usize, Vec<u32>)> = vec![(0, vec![1])];
    for d in 0..top {
        let (l0, h0) = (lo(d), hi(d));
        let (l1, h1) = (lo(d + 1), hi(d + 1));
        let dim1 = h1 - l1 + 1;
        // Reduced images with their pivot column; processed oldest first.
        let mut accepted: Vec<(usize, usize, Vec<u32>)> = Vec::new();
        live.sort_by_key(|(birth, _)| *birth);
        for (birth, v) in live.drain(..) {
            let mut img = vec![0u32; dim1];
            for (k, &c) in v.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let i = l0 + k;
                let j = d - i;
                // T ⊗ 1
                if i + 1 < m {
                    let t = i + 1 - l1;
                    img[t] = (img[t] + c) % p;
                }
                // 1 ⊗ T
                if j + 1 < n {
                    let t = i - l1;
                    img[t] = (img[t] + c) % p;
                }
            }
            debug_assert!(h0 >= l0);
            for (_, piv, row) in &accepted {
                let c = img[*piv];
                if c != 0 {
                    let f = p - c;
                    for (x, &r) in img.iter_mut().zip(row) {
                        *x = (*x + f * r) % p;
                    }
                }
            }
            match img.iter().position(|&c| c != 0) {
                Some(piv) => {
                    let inv = Prime::new(p as u64).unwrap().inv(img[piv]);
                    for x in img.iter_mut() {
                        *x = *x * inv % p;
                    }
                    accepted.push((birth, piv, img));
                }
                None => *bars.entry(d + 1 - birth).or_default() += 1,
            }
        }
        let mut used = vec![false; dim1];
        for (_, piv, _) in &accepted {
            used[*piv] = true;
        }
        live = accepted.into_iter().map(|(b, _, v)| (b, v)).collect();
        for (t, u) in used.into_iter().enumerate() {
            if !u {
                let mut e = vec![0u32; dim1];
                e[t] = 1;
                live.push((d + 1, e));
            }
        }
    }
    for (birth, _) in live {
        *bars.entry(top + 1 - birth).or_default() += 1;
    }
    let mut out: Vec<(usize, usize)> = bars.into_iter().collect();
    out.sort_unstable();
    out
}

/// `δ_m δ_n` in the `λ` basis.
pub fn delta_product(p: Prime, m: usize, n: usize) -> GammaVec {
    let mut out = GammaVec::zero(p);
    for (size, mult) in tensor_jordan_type(p, m, n) {
        let d = GammaVec::delta(p, size).scale(&Q::from_integer(mult.into()));
        out = out.add(&d).expect("same modulus");
    }
    out
}

/// `λ_i = (-1)^i (δ_{i+1} - δ_i)` as (δ index, coefficient) pairs.
fn lambda_in_delta(i: usize) -> [(usize, i64); 2] {
    let s = if i % 2 == 0 { 1 } else { -1 };
    [(i + 1, s), (i, -s)]
}

/// Product by explicit module decomposition. Indices above
/// [`ORACLE_MAX_INDEX`] are rejected.
pub fn oracle_mul(u: &GammaVec, v: &GammaVec) -> Result<GammaVec> {
    let p = u.modulus();
    if p != v.modulus() {
        return Err(Error::Mismatch("oracle product of different moduli".into()));
    }
    let bound = u.support_bound().max(v.support_bound());
    if bound > ORACLE_MAX_INDEX + 1 {
        return Err(Error::SizeLimit(format!(
            "oracle indices must be at most {ORACLE_MAX_INDEX}, got {}",
            bound - 1
        )));
    }
    let to_delta = |w: &GammaVec| -> HashMap<usize, Q> {
        let mut out: HashMap<usize, Q> = HashMap::new();
        for (i, c) in w.terms() {
            for (k, s) in lambda_in_delta(i) {
                if k > 0 {
                    *out.entry(k).or_insert_with(Q::zero) += c * Q::from_integer(s.into());
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    let du = to_delta(u);
    let dv = to_delta(v);
    let mut acc: HashMap<usize, Q> = HashMap::new();
    for (&m, a) in &du {
        for (&n, b) in &dv {
            let c = a * b;
            for (size, mult) in tensor_jordan_type(p, m, n) {
                *acc.entry(size).or_insert_with(Q::zero) += &c * Q::from_integer(mult.into());
            }
        }
    }
    let mut out = GammaVec::zero(p);
    for (size, c) in acc {
        if c.is_zero() {
            continue;
        }
        for i in 0..size {
            out.add_term(i, if i % 2 == 0 { c.clone() } else { -c.clone() });
        }
    }
    Ok(out)
}
