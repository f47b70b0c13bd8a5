//! The pairing system `x_T = (1 - (P/p) z) Π α_0 + z Σ α(λ_{k_1}⋯λ_{k_m}) Π slot_{k_j}`
//! over `Q(z)`, solved exactly by fraction-free elimination.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::RuleSystem;
use crate::colength::ColengthTable;
use crate::error::{Error, Result};
use crate::gamma::GammaVec;
use crate::qpoly::QPoly;
use crate::ratfunc::RatFunc;
use crate::rational::{q_pow, Q};

/// Unknowns are indexed by tuples of members, one member per summand.
const MAX_UNKNOWNS: usize = 4096;
const MAX_SLOT_TUPLES: usize = 100_000;

#[derive(Clone, Debug)]
pub struct PairingSolution {
    /// Per summand, its member names.
    pub bases: Vec<Vec<String>>,
    /// Member-index tuples; the first is the root tuple.
    pub tuples: Vec<Vec<usize>>,
    pub values: Vec<RatFunc>,
}

impl PairingSolution {
    pub fn root(&self) -> &RatFunc {
        &self.values[0]
    }

    /// `x_T` for the tuple of member names `names`.
    pub fn get(&self, names: &[&str]) -> Option<&RatFunc> {
        if names.len() != self.bases.len() {
            return None;
        }
        let idx: Option<Vec<usize>> = names
            .iter()
            .zip(&self.bases)
            .map(|(n, b)| b.iter().position(|m| m == n))
            .collect();
        let idx = idx?;
        self.tuples.iter().position(|t| *t == idx).map(|i| &self.values[i])
    }
}

fn check_systems(systems: &[RuleSystem]) -> Result<()> {
    let first = systems
        .first()
        .ok_or_else(|| Error::Invalid("at least one rule system is needed".into()))?;
    for sys in systems {
        sys.validate()?;
        if sys.p != first.p {
            return Err(Error::Mismatch(format!("rule systems for p = {} and p = {}", first.p, sys.p)));
        }
    }
    Ok(())
}

/// Mixed-radix enumeration of `0..sizes[0] × 0..sizes[1] × ⋯`, first index
/// slowest.
fn all_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// `α(λ_{k_1}⋯λ_{k_m})` for every slot tuple where it is nonzero.
fn slot_weights(systems: &[RuleSystem]) -> Result<Vec<(Vec<usize>, Q)>> {
    let p = systems[0].p;
    let m = systems.len();
    let count = p.as_usize().checked_pow(m as u32).filter(|&c| c <= MAX_SLOT_TUPLES);
    if count.is_none() {
        return Err(Error::SizeLimit(format!("p^{m} slot tuples exceed {MAX_SLOT_TUPLES}")));
    }
    let mut out = Vec::new();
    for ks in all_tuples(&vec![p.as_usize(); m]) {
        let mut prod = GammaVec::one(p);
        for &k in &ks {
            prod = prod.mul(&GammaVec::lambda(p, k))?;
        }
        let a = prod.alpha();
        if !a.is_zero() {
            out.push((ks, a));
        }
    }
    Ok(out)
}

/// Solves for `x_T` over all member tuples `T`. The root tuple comes first.
pub fn solve_r_system(systems: &[RuleSystem]) -> Result<PairingSolution> {
    check_systems(systems)?;
    let p = systems[0].p;
    let sizes: Vec<usize> = systems.iter().map(|s| s.basis.len()).collect();
    let total = sizes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    if total.is_none_or(|t| t > MAX_UNKNOWNS) {
        return Err(Error::SizeLimit(format!("more than {MAX_UNKNOWNS} member tuples")));
    }
    let tuples = all_tuples(&sizes);
    let index: BTreeMap<Vec<usize>, usize> =
        tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let s_tot: u32 = systems.iter().map(|s| s.s).sum();
    if s_tot == 0 {
        return Err(Error::Invalid("summands must have at least one variable".into()));
    }
    let big_p_over_p = q_pow(p.get(), s_tot - 1);
    let weights = slot_weights(systems)?;

    let alpha0: Vec<Vec<Q>> = systems
        .iter()
        .map(|s| s.basis.iter().map(|b| s.alpha0[b].clone()).collect())
        .collect();
    // Slot terms per (summand, member, k): `Some(j)` is member `j`, `None` is Δ.
    let terms: Vec<Vec<Vec<Vec<(Option<usize>, Q)>>>> = systems
        .iter()
        .map(|sys| {
            sys.basis
                .iter()
                .map(|b| {
                    (0..p.as_usize())
                        .map(|k| match sys.slot(b, k) {
                            None => vec![],
                            Some(slot) => slot
                                .coeffs
                                .iter()
                                .filter(|(_, c)| !c.is_zero())
                                .map(|(n, c)| (sys.index_of(n), c.clone()))
                                .chain((!slot.delta.is_zero()).then(|| (None, slot.delta.clone())))
                                .collect(),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let n = tuples.len();
    // Row T: x_T - z Σ M[T][T'] x_T' = c0 (1 - (P/p) z) + c1 z.
    let mut rows: Vec<Vec<QPoly>> = vec![vec![QPoly::zero(); n + 1]; n];
    for (r, t) in tuples.iter().enumerate() {
        let c0: Q = t.iter().enumerate().map(|(j, &i)| alpha0[j][i].clone()).product();
        let mut c1 = Q::zero();
        let mut m_row: BTreeMap<usize, Q> = BTreeMap::new();
        for (ks, w) in &weights {
            let mut partial: Vec<(Vec<Option<usize>>, Q)> = vec![(vec![], w.clone())];
            for (j, (&i, &k)) in t.iter().zip(ks).enumerate() {
                let slot = &terms[j][i][k];
                partial = partial
                    .into_iter()
                    .flat_map(|(sel, c)| {
                        slot.iter().map(move |(m, d)| {
                            let mut sel = sel.clone();
                            sel.push(*m);
                            (sel, &c * d)
                        })
                    })
                    .collect();
                if partial.is_empty() {
                    break;
                }
            }
            for (sel, c) in partial {
                if sel.iter().all(Option::is_some) {
                    let target: Vec<usize> = sel.into_iter().map(Option::unwrap).collect();
                    *m_row.entry(index[&target]).or_insert_with(Q::zero) += c;
                } else {
                    // A Δ argument makes the pairing collapse to Π α_0 of the others.
                    let rest: Q = sel
                        .iter()
                        .enumerate()
                        .filter_map(|(j, m)| m.map(|i| alpha0[j][i].clone()))
                        .product();
                    c1 += c * rest;
                }
            }
        }
        rows[r][r] = QPoly::one();
        for (col, c) in m_row {
            rows[r][col] = rows[r][col].sub(&QPoly::linear(Q::zero(), c));
        }
        rows[r][n] = QPoly::linear(c0.clone(), &c1 - &c0 * &big_p_over_p);
    }

    let values = bareiss_solve(rows)?;
    let bases = systems.iter().map(|s| s.basis.clone()).collect();
    Ok(PairingSolution { bases, tuples, values })
}

/// Solves the augmented `n × (n+1)` system over `Q[z]` by fraction-free
/// elimination, then back-substitutes in `Q(z)`.
fn bareiss_solve(mut a: Vec<Vec<QPoly>>) -> Result<Vec<RatFunc>> {
    let n = a.len();
    let mut prev = QPoly::one();
    for k in 0..n {
        let pivot = (k..n).find(|&r| !a[r][k].is_zero()).ok_or(Error::Singular)?;
        a.swap(k, pivot);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = v.exact_div(&prev).expect("fraction-free elimination divides exactly");
            }
            a[i][k] = QPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x: Vec<RatFunc> = vec![RatFunc::zero(); n];
    for i in (0..n).rev() {
        let mut acc = RatFunc::from_poly(a[i][n].clone());
        for j in i + 1..n {
            if !a[i][j].is_zero() {
                acc = acc.sub(&RatFunc::from_poly(a[i][j].clone()).mul(&x[j]));
            }
        }
        // `a[i][i]` may vanish at 0 while the quotient is still a power series.
        x[i] = RatFunc::new(acc.numerator().clone(), acc.denominator().mul(&a[i][i]))?;
    }
    Ok(x)
}

/// `Σ_n e_n(f_1 ⊕ ⋯ ⊕ f_m) z^n = x_root / (1 - p^{s_tot - 1} z)`.
pub fn hks_sum(systems: &[RuleSystem]) -> Result<RatFunc> {
    let sol = solve_r_system(systems)?;
    let p = systems[0].p;
    let s_tot: u32 = systems.iter().map(|s| s.s).sum();
    let c = q_pow(p.get(), s_tot - 1);
    let den = RatFunc::new(QPoly::one(), QPoly::linear(Q::one(), -c))?;
    Ok(sol.root().mul(&den))
}

/// `lim_n e_n / p^{n(s_tot - 1)}`, read off the simple pole of `h` at
/// `z = p^{-(s_tot-1)}`.
pub fn hk_multiplicity(h: &RatFunc, s_tot: u32, p: crate::prime::Prime) -> Result<Q> {
    if s_tot == 0 {
        return Err(Error::Invalid("s_tot must be positive".into()));
    }
    let c = q_pow(p.get(), s_tot - 1);
    let z0 = Q::one() / &c;
    let factor = QPoly::linear(Q::one(), -c);
    match h.denominator().exact_div(&factor) {
        None => Ok(Q::zero()),
        Some(rest) => {
            let r = rest.eval(&z0);
            if r.is_zero() {
                return Err(Error::HigherOrderPole);
            }
            Ok(h.numerator().eval(&z0) / r)
        }
    }
}

/// `e_n(f ⊕ g) = Σ_{i<q} (c_{i+1}(f) - c_i(f)) (c_{i+1}(g) - c_i(g))` for two
/// tables at the same `q = p^n`.
pub fn en_dot(tf: &ColengthTable, tg: &ColengthTable) -> Result<u64> {
    if tf.q != tg.q {
        return Err(Error::Mismatch(format!("tables at q = {} and q = {}", tf.q, tg.q)));
    }
    let (a, b) = (tf.increments()?, tg.increments()?);
    Ok(a.iter().zip(&b).map(|(x, y)| (x * y) as u64).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prime::Prime;

    const EXAMPLE_ONE_F: &str = r#"{
        "p": 3, "s": 2, "basis": ["a", "b"],
        "alpha0": {"a": "1", "b": "-1"},
        "rules": [
            {"elem": "a", "slots": [
                {"k": 0, "coeffs": {"b": "1"}, "delta": "9"},
                {"k": 1, "coeffs": {"b": "1"}}]},
            {"elem": "b", "slots": [
                {"k": 1, "coeffs": {"a": "1"}},
                {"k": 2, "coeffs": {"a": "1"}, "delta": "-9"}]}
        ]
    }"#;

    fn f_rules() -> RuleSystem {
        RuleSystem::from_json(EXAMPLE_ONE_F).unwrap()
    }

    #[test]
    fn single_summand() {
        let sol = solve_r_system(&[f_rules()]).unwrap();
        assert_eq!(*sol.root(), RatFunc::from_ints(&[1, 5, 3], &[1]).unwrap());
        let h = hks_sum(&[f_rules()]).unwrap();
        assert_eq!(h, RatFunc::from_ints(&[1, 5, 3], &[1, -3]).unwrap());
    }

    #[test]
    fn self_sum() {
        let f = f_rules();
        let sol = solve_r_system(&[f.clone(), f.clone()]).unwrap();
        let raa = sol.get(&["a", "a"]).unwrap();
        let rbb = sol.get(&["b", "b"]).unwrap();
        // r(a,a) = 1 + 36z + 2z r(b,b).
        let rhs = RatFunc::from_ints(&[1, 36], &[1])
            .unwrap()
            .add(&RatFunc::from_ints(&[0, 2], &[1]).unwrap().mul(rbb));
        assert_eq!(*raa, rhs);
        let h = hks_sum(&[f.clone(), f]).unwrap();
        assert_eq!(h, RatFunc::from_ints(&[1, 36], &[1, -29, 54]).unwrap());
        let mu = hk_multiplicity(&h, 4, Prime::new(3).unwrap()).unwrap();
        assert_eq!(mu, Q::new(63.into(), 25.into()));
    }

    #[test]
    fn multiplicity_cases() {
        let p = Prime::new(3).unwrap();
        let no_pole = RatFunc::from_ints(&[1], &[1, -2]).unwrap();
        assert_eq!(hk_multiplicity(&no_pole, 4, p).unwrap(), Q::zero());
        let double = RatFunc::from_ints(&[1], &[1, -54, 729]).unwrap();
        assert_eq!(hk_multiplicity(&double, 4, p), Err(Error::HigherOrderPole));
    }
}
