//! Functions on `p`-adic rationals of `[0, 1]`, stored as their exact values
//! at `i / p^N` for `0 <= i <= p^N`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::colength::{colength_table_with, ColengthTable, DenseLimit};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::prime::Prime;
use crate::rational::{q_int, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFn {
    p: Prime,
    depth: u32,
    #[serde(with = "serde_q_vec")]
    values: Vec<Q>,
}

mod serde_q_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_q(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

fn grid_len(p: Prime, depth: u32) -> Result<usize> {
    p.pow(depth)
        .filter(|&q| q < 10_000_000)
        .map(|q| q + 1)
        .ok_or_else(|| Error::SizeLimit(format!("grid of depth {depth} over p = {p}")))
}

impl GridFn {
    pub fn new(p: Prime, depth: u32, values: Vec<Q>) -> Result<GridFn> {
        let len = grid_len(p, depth)?;
        if values.len() != len {
            return Err(Error::Mismatch(format!(
                "depth {depth} grid over p = {p} needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(GridFn { p, depth, values })
    }

    pub fn from_fn(p: Prime, depth: u32, f: impl Fn(&Q) -> Q) -> Result<GridFn> {
        let len = grid_len(p, depth)?;
        let q = q_int((len - 1) as i64);
        let values = (0..len).map(|i| f(&(q_int(i as i64) / &q))).collect();
        Ok(GridFn { p, depth, values })
    }

    /// `t ↦ t`.
    pub fn identity(p: Prime, depth: u32) -> Result<GridFn> {
        GridFn::from_fn(p, depth, |t| t.clone())
    }

    pub fn constant(p: Prime, depth: u32, c: Q) -> Result<GridFn> {
        GridFn::from_fn(p, depth, |_| c.clone())
    }

    /// Samples of `φ_f` from a table at `q = p^N` with `amax >= q`.
    pub fn from_table(table: &ColengthTable, s: usize) -> Result<GridFn> {
        let p = table.f.modulus();
        let depth = p
            .log(table.q)
            .ok_or_else(|| Error::Invalid(format!("{} is not a power of {p}", table.q)))?;
        if table.amax() < table.q {
            return Err(Error::TableTooShort { need: table.q, have: table.amax() });
        }
        let qs = q_int(table.q as i64).pow(s as i32);
        let values = table.values[..=table.q].iter().map(|&c| q_int(c as i64) / &qs).collect();
        GridFn::new(p, depth, values)
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `p^depth`.
    pub fn q(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &Q {
        &self.values[i]
    }

    fn check_shape(&self, other: &GridFn) -> Result<()> {
        if self.p != other.p || self.depth != other.depth {
            return Err(Error::Mismatch(format!(
                "grids (p = {}, depth {}) and (p = {}, depth {})",
                self.p, self.depth, other.p, other.depth
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &GridFn, f: impl Fn(&Q, &Q) -> Q) -> Result<GridFn> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect();
        Ok(GridFn { p: self.p, depth: self.depth, values })
    }

    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Q) -> GridFn {
        GridFn { p: self.p, depth: self.depth, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// The same function on the coarser grid of depth `depth`.
    pub fn restrict(&self, depth: u32) -> Result<GridFn> {
        if depth > self.depth {
            return Err(Error::Invalid(format!(
                "cannot restrict depth {} grid to depth {depth}",
                self.depth
            )));
        }
        let step = self.p.pow(self.depth - depth).expect("fits");
        let values = self.values.iter().step_by(step).cloned().collect();
        Ok(GridFn { p: self.p, depth, values })
    }

    /// `T_{q|b}φ : t ↦ φ((t + b)/q)` with `q = p^m`, at depth `N - m`.
    pub fn transform_t(&self, m: u32, b: usize) -> Result<GridFn> {
        if m > self.depth {
            return Err(Error::Invalid(format!("level {m} exceeds grid depth {}", self.depth)));
        }
        let q = self.p.pow(m).expect("fits");
        if b >= q {
            return Err(Error::Invalid(format!("offset {b} must be below {q}")));
        }
        let depth = self.depth - m;
        let len = self.p.pow(depth).expect("fits");
        let start = b * len;
        Ok(GridFn { p: self.p, depth, values: self.values[start..=start + len].to_vec() })
    }

    /// `t ↦ φ(1 - t)`.
    pub fn reflect(&self) -> GridFn {
        let mut values = self.values.clone();
        values.reverse();
        GridFn { p: self.p, depth: self.depth, values }
    }

    /// Subtracts the affine function agreeing with `φ` at both endpoints.
    pub fn normalize_mod_linear(&self) -> GridFn {
        let q = q_int(self.q() as i64);
        let a = &self.values[0];
        let slope = &self.values[self.q()] - a;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v - a - &slope * q_int(i as i64) / &q)
            .collect();
        GridFn { p: self.p, depth: self.depth, values }
    }

    pub fn is_affine(&self) -> bool {
        self.normalize_mod_linear().values.iter().all(Zero::is_zero)
    }

    /// `φ_{f^m}` from `φ_f`: `t ↦ φ_f(mt)` for `mt <= 1`, else `1`.
    pub fn phi_power(&self, m: usize) -> Result<GridFn> {
        if m == 0 {
            return Err(Error::Invalid("power must be positive".into()));
        }
        let q = self.q();
        let values = (0..=q)
            .map(|i| match i.checked_mul(m) {
                Some(j) if j <= q => self.values[j].clone(),
                _ => Q::one(),
            })
            .collect();
        Ok(GridFn { p: self.p, depth: self.depth, values })
    }

    /// `φ_{fg} = φ_f + φ_g - φ_f φ_g` for `f, g` in disjoint variables.
    pub fn phi_product(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a + b - a * b)
    }
}

/// `φ_f` sampled at depth `N`.
pub fn sample_phi(f: &Poly, depth: u32) -> Result<GridFn> {
    sample_phi_with(f, depth, DenseLimit::default())
}

pub fn sample_phi_with(f: &Poly, depth: u32, limit: DenseLimit) -> Result<GridFn> {
    let p = f.modulus();
    let q = p
        .pow(depth)
        .ok_or_else(|| Error::SizeLimit(format!("{p}^{depth} overflows")))?;
    let table = colength_table_with(q, f, q, limit)?;
    GridFn::from_table(&table, f.nvars())
}
