//! Fitting a rational generating function to the first few terms of a
//! sequence, as an independent cross-check on the solver.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qpoly::QPoly;
use crate::ratfunc::RatFunc;
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub ratfunc: RatFunc,
    /// Number of supplied terms beyond those needed to pin down the fit.
    pub predicted: usize,
    /// At least two terms were predicted correctly.
    pub confirmed: bool,
}

/// Solves `m x = rhs` over `Q`, or `None` if `m` is singular.
fn solve_dense(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rhs.len();
    for c in 0..n {
        let piv = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, piv);
        rhs.swap(c, piv);
        let inv = Q::one() / &m[c][c];
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = &m[r][c] * &inv;
                for k in c..n {
                    let d = &f * &m[c][k];
                    m[r][k] -= d;
                }
                let d = &f * &rhs[c];
                rhs[r] -= d;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Tries `N/D` with `deg N <= e`, `deg D <= d`, `D(0) = 1`, matching all of `v`.
fn try_fit(v: &[Q], d: usize, e: usize) -> Option<RatFunc> {
    let at = |k: usize, j: usize| if j <= k { v[k - j].clone() } else { Q::zero() };
    // Equations k = e+1 ..= e+d determine D_1..D_d.
    let m: Vec<Vec<Q>> = (e + 1..=e + d).map(|k| (1..=d).map(|j| at(k, j)).collect()).collect();
    let rhs: Vec<Q> = (e + 1..=e + d).map(|k| -at(k, 0)).collect();
    let tail = solve_dense(m, rhs)?;
    let den: Vec<Q> = std::iter::once(Q::one()).chain(tail).collect();
    let conv = |k: usize| -> Q { (0..=d).map(|j| &den[j] * at(k, j)).sum() };
    if (e + 1..v.len()).any(|k| !conv(k).is_zero()) {
        return None;
    }
    let num: Vec<Q> = (0..=e.min(v.len() - 1)).map(conv).collect();
    RatFunc::new(QPoly::new(num), QPoly::new(den)).ok()
}

/// The rational function of least total degree `deg N + deg D` reproducing
/// `values`, provided at least one supplied term is left over as a check.
pub fn detect_recurrence(values: &[Q]) -> Result<Recurrence> {
    let len = values.len();
    if len < 4 {
        return Err(Error::Invalid(format!("need at least 4 terms, got {len}")));
    }
    let max_d = len / 2;
    for total in 0..len - 1 {
        for d in 0..=total.min(max_d) {
            if let Some(ratfunc) = try_fit(values, d, total - d) {
                let predicted = len - (total + 1);
                return Ok(Recurrence { ratfunc, predicted, confirmed: predicted >= 2 });
            }
        }
    }
    Err(Error::NoRecurrence(max_d))
}
