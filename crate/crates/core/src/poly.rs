//! Sparse multivariate polynomials over a prime field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::prime::Prime;

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Monomial {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial with coefficients in `F_p`, no stored zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    modulus: Prime,
    vars: Vec<String>,
    terms: BTreeMap<Monomial, u32>,
}

impl Poly {
    pub fn zero(modulus: Prime, vars: &[&str]) -> Poly {
        Poly::zero_owned(modulus, vars.iter().map(|v| v.to_string()).collect())
    }

    pub fn zero_owned(modulus: Prime, vars: Vec<String>) -> Poly {
        Poly { modulus, vars, terms: BTreeMap::new() }
    }

    pub fn constant(modulus: Prime, vars: Vec<String>, c: i64) -> Poly {
        let mut out = Poly::zero_owned(modulus, vars);
        let n = out.nvars();
        out.add_term(Monomial::one(n), c.rem_euclid(modulus.get() as i64) as u32);
        out
    }

    pub fn var(modulus: Prime, vars: Vec<String>, index: usize) -> Poly {
        let mut out = Poly::zero_owned(modulus, vars);
        let mut m = Monomial::one(out.nvars());
        m.0[index] = 1;
        out.add_term(m, 1);
        out
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; coefficients
    /// are reduced mod `p` and like terms merged.
    pub fn from_terms(
        modulus: Prime,
        vars: Vec<String>,
        terms: impl IntoIterator<Item = (Vec<u32>, i64)>,
    ) -> Result<Poly> {
        let mut out = Poly::zero_owned(modulus, vars);
        let p = modulus.get() as i64;
        for (exps, c) in terms {
            if exps.len() != out.nvars() {
                return Err(Error::Mismatch(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    out.nvars()
                )));
            }
            out.add_term(Monomial(exps), c.rem_euclid(p) as u32);
        }
        Ok(out)
    }

    pub fn parse(text: &str, modulus: Prime, vars: &[&str]) -> Result<Poly> {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        Parser::new(text, modulus, vars).parse()
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> u32 {
        self.terms.get(&Monomial::one(self.nvars())).copied().unwrap_or(0)
    }

    /// True when `f` is a unit of the local ring, i.e. has nonzero constant term.
    pub fn is_unit(&self) -> bool {
        self.constant_term() != 0
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Degree `d` if every term has total degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    fn add_term(&mut self, m: Monomial, c: u32) {
        let p = self.modulus.get();
        let c = c % p;
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = (*o.get() + c) % p;
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Poly) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::Mismatch(format!("moduli {} and {}", self.modulus, other.modulus)));
        }
        if self.vars != other.vars {
            return Err(Error::Mismatch(format!(
                "variables {:?} and {:?}",
                self.vars, other.vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Poly {
        let p = self.modulus.get();
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = p - *c;
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: i64) -> Poly {
        let p = self.modulus.get() as i64;
        let c = c.rem_euclid(p) as u64;
        let mut out = Poly::zero_owned(self.modulus, self.vars.clone());
        for (m, v) in self.terms() {
            out.add_term(m.clone(), (v as u64 * c % p as u64) as u32);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_compatible(other)?;
        Ok(self.mul_impl(other, None))
    }

    /// Product with every monomial having some exponent `>= q` dropped, i.e.
    /// the product in `F_p[x]/(x_1^q, .., x_s^q)`.
    pub fn mul_trunc(&self, other: &Poly, q: usize) -> Result<Poly> {
        self.check_compatible(other)?;
        Ok(self.mul_impl(other, Some(q)))
    }

    fn mul_impl(&self, other: &Poly, trunc: Option<usize>) -> Poly {
        let p = self.modulus.get() as u64;
        let mut acc: BTreeMap<Monomial, u64> = BTreeMap::new();
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let m = ma.mul(mb);
                if let Some(q) = trunc {
                    if m.0.iter().any(|&e| e as usize >= q) {
                        continue;
                    }
                }
                let slot = acc.entry(m).or_insert(0);
                *slot = (*slot + ca as u64 * cb as u64) % p;
            }
        }
        let mut out = Poly::zero_owned(self.modulus, self.vars.clone());
        out.terms = acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, c as u32)).collect();
        out
    }

    /// Truncation to `F_p[x]/(x_1^q, .., x_s^q)`.
    pub fn truncate(&self, q: usize) -> Poly {
        let mut out = self.clone();
        out.terms.retain(|m, _| m.0.iter().all(|&e| (e as usize) < q));
        out
    }

    /// Frobenius on exponents: `f(x_1^k, .., x_s^k)`. For `k = p^e` this is
    /// `f^k` in characteristic `p`.
    pub fn inflate(&self, k: u32) -> Poly {
        let mut out = Poly::zero_owned(self.modulus, self.vars.clone());
        out.terms = self
            .terms
            .iter()
            .map(|(m, &c)| (Monomial(m.0.iter().map(|e| e * k).collect()), c))
            .collect();
        out
    }

    pub fn pow(&self, m: u64) -> Poly {
        self.pow_impl(m, None)
    }

    /// `f^m` in `F_p[x]/(x_1^q, .., x_s^q)`.
    pub fn pow_trunc(&self, m: u64, q: usize) -> Poly {
        self.pow_impl(m, Some(q))
    }

    /// Writes `m` in base `p` and uses `f^(d p^i) = inflate(f^d, p^i)`, so only
    /// powers below `p` are formed by multiplication.
    fn pow_impl(&self, m: u64, trunc: Option<usize>) -> Poly {
        let p = self.modulus.get() as u64;
        let one = Poly::constant(self.modulus, self.vars.clone(), 1);
        let mut result = one.clone();
        let mut rest = m;
        let mut scale: u64 = 1;
        let base = match trunc {
            Some(q) => self.truncate(q),
            None => self.clone(),
        };
        while rest > 0 {
            let digit = rest % p;
            rest /= p;
            if digit > 0 {
                if let Some(q) = trunc {
                    // x^(scale) already vanishes unless the constant term survives.
                    if scale as usize >= q && !base.is_unit() {
                        return Poly::zero_owned(self.modulus, self.vars.clone());
                    }
                }
                let mut small = one.clone();
                for _ in 0..digit {
                    small = small.mul_impl(&base, trunc);
                }
                let k = u32::try_from(scale).expect("exponent overflow in pow");
                let mut inflated = small.inflate(k);
                if let Some(q) = trunc {
                    inflated = inflated.truncate(q);
                }
                result = result.mul_impl(&inflated, trunc);
                if result.is_zero() {
                    return result;
                }
            }
            scale = scale.saturating_mul(p);
        }
        result
    }

    /// Places `self` in a polynomial ring with variable list `vars`, mapping
    /// variable `i` of `self` to `vars[offset + i]`.
    pub fn embed(&self, vars: &[String], offset: usize) -> Result<Poly> {
        if offset + self.nvars() > vars.len() {
            return Err(Error::Mismatch("embedding does not fit".into()));
        }
        let mut out = Poly::zero_owned(self.modulus, vars.to_vec());
        for (m, c) in self.terms() {
            let mut e = vec![0; vars.len()];
            e[offset..offset + self.nvars()].copy_from_slice(&m.0);
            out.add_term(Monomial(e), c);
        }
        Ok(out)
    }

    /// `f_1(x^(1)) + f_2(x^(2)) + ..` with every summand in its own block of
    /// fresh variables named `<var><block index + 1>`.
    pub fn disjoint_sum(parts: &[Poly]) -> Result<Poly> {
        let (vars, offsets) = Self::disjoint_vars(parts)?;
        let mut out = Poly::zero_owned(parts[0].modulus, vars.clone());
        for (part, off) in parts.iter().zip(offsets) {
            out = out.add(&part.embed(&vars, off)?)?;
        }
        Ok(out)
    }

    /// Product analogue of [`Poly::disjoint_sum`].
    pub fn disjoint_product(parts: &[Poly]) -> Result<Poly> {
        let (vars, offsets) = Self::disjoint_vars(parts)?;
        let mut out = Poly::constant(parts[0].modulus, vars.clone(), 1);
        for (part, off) in parts.iter().zip(offsets) {
            out = out.mul(&part.embed(&vars, off)?)?;
        }
        Ok(out)
    }

    fn disjoint_vars(parts: &[Poly]) -> Result<(Vec<String>, Vec<usize>)> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty list of summands".into()))?;
        let mut vars = Vec::new();
        let mut offsets = Vec::new();
        for (j, part) in parts.iter().enumerate() {
            if part.modulus != first.modulus {
                return Err(Error::Mismatch("summands over different primes".into()));
            }
            offsets.push(vars.len());
            vars.extend(part.vars.iter().map(|v| format!("{v}{}", j + 1)));
        }
        Ok((vars, offsets))
    }

    /// Canonical text: terms in decreasing graded-lex order, `c*x^e*y^f`
    /// with unit coefficients and exponents omitted.
    pub fn canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                out.push('+');
            }
            let mut factors: Vec<String> = Vec::new();
            if *c != 1 || m.degree() == 0 {
                factors.push(c.to_string());
            }
            for (v, &e) in self.vars.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    modulus: Prime,
    vars: Vec<String>,
}

impl Parser {
    fn new(text: &str, modulus: Prime, vars: Vec<String>) -> Parser {
        Parser { chars: text.chars().collect(), pos: 0, modulus, vars }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Poly> {
        let e = self.expr()?;
        if let Some(c) = self.peek() {
            return self.err(format!("unexpected `{c}`"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?)?;
                }
                Some(c) if c.is_ascii_alphanumeric() || c == '(' || c == '_' => {
                    acc = acc.mul(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.uint()?;
            let e: u64 = e.try_into().map_err(|_| Error::Syntax {
                pos: self.pos,
                msg: "exponent too large".into(),
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u128> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an unsigned integer");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().or_else(|_| {
            Err(Error::Syntax { pos: start, msg: "integer too large".into() })
        })
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                let c = (n % self.modulus.get() as u128) as i64;
                Ok(Poly::constant(self.modulus, self.vars.clone(), c))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Poly::var(self.modulus, self.vars.clone(), i)),
                    None => Err(Error::UnknownVariable(name)),
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Identifiers appearing in a polynomial text, in order of first occurrence.
pub fn identifiers(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_ascii_alphabetic() || chars[i] == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if !out.contains(&name) {
                out.push(name);
            }
        } else {
            i += 1;
        }
    }
    out
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pow_p_is_inflation(terms in proptest::collection::vec(((0u32..4, 0u32..4), 0i64..5), 1..5)) {
            let p5 = Prime::new(5).unwrap();
            let f = Poly::from_terms(
                p5,
                vec!["x".into(), "y".into()],
                terms.into_iter().map(|((a, b), c)| (vec![a, b], c)),
            ).unwrap();
            prop_assert_eq!(f.pow(5), f.inflate(5));
            let naive = (0..5).fold(Poly::constant(p5, f.vars().to_vec(), 1), |acc, _| acc.mul(&f).unwrap());
            prop_assert_eq!(f.pow(5), naive);
        }
    }
}
