//! Polynomial input with inferred variables, and the series expression
//! language `"f=<poly>; g=<poly>; f+g*g+f^2"`.

use std::collections::BTreeMap;

use hkfractal::poly::identifiers;
use hkfractal::{Poly, Prime};

/// Identifiers in `text`, sorted, so `"y^3-x^4"` has variables `x, y`.
pub fn infer_vars(text: &str) -> Vec<String> {
    let mut vars = identifiers(text);
    vars.sort();
    vars
}

pub fn parse_poly(text: &str, p: Prime) -> Result<Poly, String> {
    let mut vars = infer_vars(text);
    if vars.is_empty() {
        vars.push("x".into());
    }
    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    Poly::parse(text, p, &refs).map_err(|e| format!("polynomial `{text}`: {e}"))
}

/// One summand: a product of named polynomials in disjoint variables, raised
/// to a power.
#[derive(Clone, Debug)]
pub struct Summand {
    pub label: String,
    pub factors: Vec<Poly>,
    pub power: usize,
}

impl Summand {
    /// Total number of variables.
    pub fn nvars(&self) -> usize {
        self.factors.iter().map(Poly::nvars).sum()
    }
}

pub fn parse_series(text: &str, p: Prime) -> Result<Vec<Summand>, String> {
    if !text.contains('=') {
        let f = parse_poly(text.trim(), p)?;
        return Ok(vec![Summand { label: "f".into(), factors: vec![f], power: 1 }]);
    }
    let mut defs: BTreeMap<String, Poly> = BTreeMap::new();
    let mut sum: Option<&str> = None;
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('=') {
            Some((name, body)) => {
                let name = name.trim();
                if !is_name(name) {
                    return Err(format!("bad definition name `{name}`"));
                }
                defs.insert(name.to_string(), parse_poly(body.trim(), p)?);
            }
            None if sum.is_none() => sum = Some(part),
            None => return Err(format!("more than one sum expression: `{part}`")),
        }
    }
    let sum = sum.ok_or("missing the sum expression after the definitions")?;
    let lookup = |name: &str| -> Result<Poly, String> {
        defs.get(name.trim()).cloned().ok_or_else(|| format!("undefined summand `{}`", name.trim()))
    };
    sum.split('+')
        .map(|term| {
            let term = term.trim();
            let (base, power) = match term.split_once('^') {
                Some((b, m)) => {
                    let m: usize = m.trim().parse().map_err(|_| format!("bad power in `{term}`"))?;
                    if m == 0 {
                        return Err(format!("power must be positive in `{term}`"));
                    }
                    (b, m)
                }
                None => (term, 1),
            };
            let factors = base.split('*').map(lookup).collect::<Result<Vec<_>, _>>()?;
            Ok(Summand { label: term.replace(' ', ""), factors, power })
        })
        .collect()
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|c| c.is_ascii_alphabetic()) && c.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
