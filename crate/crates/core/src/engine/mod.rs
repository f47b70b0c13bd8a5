//! Shift-rule discovery, the pairing system over `Q(z)`, series assembly and
//! recurrence detection.
//!
//! A rule for a member `b` states that `p^s S(b) = Σ_k λ_k (Σ_j f_j b_j + e Δ)`,
//! one slot per `k < p`. Rules are kept by member name so that hand-written
//! rule files can be read without any sequence data.

mod discover;
mod recurrence;
mod solve;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use discover::{discover_from_grid, discover_from_seq, discover_rules, Discovery, MAX_MEMBERS};
pub use recurrence::{detect_recurrence, Recurrence};
pub use solve::{en_dot, hk_multiplicity, hks_sum, solve_r_system, PairingSolution};

use crate::coherent::{delta_seq, recombine, CohSeq};
use crate::error::{Error, Result};
use crate::gamma::GammaVec;
use crate::prime::Prime;
use crate::rational::{q_int, serde_q, Q};

/// Slot `k` of a rule: `Σ_name coeffs[name] · name + delta · Δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRule {
    pub k: usize,
    #[serde(default, with = "serde_q_map")]
    pub coeffs: BTreeMap<String, Q>,
    #[serde(default = "zero_q", with = "serde_q")]
    pub delta: Q,
}

fn zero_q() -> Q {
    Q::zero()
}

mod serde_q_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{fmt_q, parse_q, Q};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Q>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, fmt_q(v))))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Q>, D::Error> {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| Ok((k, parse_q(&v).map_err(serde::de::Error::custom)?)))
            .collect()
    }
}

impl SlotRule {
    pub fn is_zero(&self) -> bool {
        self.delta.is_zero() && self.coeffs.values().all(Zero::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRule {
    pub elem: String,
    /// Slots not listed are zero.
    pub slots: Vec<SlotRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSystem {
    pub p: Prime,
    /// Number of variables of the summand; the shift is scaled by `p^s`.
    pub s: u32,
    /// Member names; the first is the root `𝓛(φ)`.
    pub basis: Vec<String>,
    #[serde(with = "serde_q_map")]
    pub alpha0: BTreeMap<String, Q>,
    pub rules: Vec<ElementRule>,
    /// Pairs `(b, R(b))` of members related by reflection.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reflections: BTreeMap<String, String>,
}

impl RuleSystem {
    pub fn root(&self) -> &str {
        &self.basis[0]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b == name)
    }

    pub fn rule_for(&self, name: &str) -> Option<&ElementRule> {
        self.rules.iter().find(|r| r.elem == name)
    }

    /// Slot `k` of the rule for `name`, or `None` if that slot is zero.
    pub fn slot(&self, name: &str, k: usize) -> Option<&SlotRule> {
        self.rule_for(name)?.slots.iter().find(|s| s.k == k)
    }

    /// Checks names, slot indices and that every member has exactly one rule.
    pub fn validate(&self) -> Result<()> {
        let p = self.p.as_usize();
        if self.basis.is_empty() {
            return Err(Error::Invalid("rule system has an empty basis".into()));
        }
        for (i, name) in self.basis.iter().enumerate() {
            if self.basis[..i].contains(name) {
                return Err(Error::Invalid(format!("member {name:?} listed twice")));
            }
            if !self.alpha0.contains_key(name) {
                return Err(Error::Invalid(format!("no alpha0 for member {name:?}")));
            }
            let count = self.rules.iter().filter(|r| &r.elem == name).count();
            if count != 1 {
                return Err(Error::Invalid(format!("member {name:?} has {count} rules")));
            }
        }
        for rule in &self.rules {
            if self.index_of(&rule.elem).is_none() {
                return Err(Error::Invalid(format!("rule for unknown member {:?}", rule.elem)));
            }
            let mut seen = vec![false; p];
            for slot in &rule.slots {
                if slot.k >= p {
                    return Err(Error::Invalid(format!(
                        "rule for {:?} has slot {} >= p = {p}",
                        rule.elem, slot.k
                    )));
                }
                if std::mem::replace(&mut seen[slot.k], true) {
                    return Err(Error::Invalid(format!(
                        "rule for {:?} lists slot {} twice",
                        rule.elem, slot.k
                    )));
                }
                if let Some(bad) = slot.coeffs.keys().find(|n| self.index_of(n).is_none()) {
                    return Err(Error::Invalid(format!(
                        "rule for {:?} refers to unknown member {bad:?}",
                        rule.elem
                    )));
                }
            }
        }
        for (a, b) in &self.reflections {
            if self.index_of(a).is_none() || self.index_of(b).is_none() {
                return Err(Error::Invalid(format!("reflection pair ({a}, {b}) is not in the basis")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<RuleSystem> {
        let sys: RuleSystem = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        sys.validate()?;
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule systems serialize")
    }

    /// Checks `p^s S(b) = Σ_k λ_k (slot k)` for every member, using
    /// `members[i]` as the sequence of `basis[i]`. Returns, per member, the
    /// depth to which its rule was verified.
    pub fn verify(&self, members: &[CohSeq]) -> Result<Vec<u32>> {
        self.validate()?;
        if members.len() != self.basis.len() {
            return Err(Error::Mismatch(format!(
                "{} sequences for {} members",
                members.len(),
                self.basis.len()
            )));
        }
        let scale = q_int(self.p.as_usize().pow(self.s) as i64);
        let mut depths = Vec::with_capacity(members.len());
        for (name, seq) in self.basis.iter().zip(members) {
            if seq.alpha0() != self.alpha0[name] {
                return Err(Error::Recombination(format!("alpha0 of {name} disagrees")));
            }
            let depth = seq.depth().checked_sub(1).ok_or_else(|| {
                Error::NoClosure(format!("member {name} has depth 0; nothing to verify"))
            })?;
            let depth = self
                .rule_for(name)
                .into_iter()
                .flat_map(|r| r.slots.iter())
                .flat_map(|slot| slot.coeffs.keys())
                .map(|n| members[self.index_of(n).expect("validated")].depth())
                .fold(depth, u32::min);
            let w: Vec<GammaVec> = seq.shift()?.iter().map(|e| e.scale(&scale)).collect();
            let slots = (0..self.p.as_usize())
                .map(|k| self.slot_sequence(name, k, members, depth))
                .collect::<Result<Vec<_>>>()?;
            let rhs = recombine(self.p, &slots)?;
            let w = &w[..rhs.len()];
            if rhs != w {
                return Err(Error::Recombination(format!(
                    "rule for {name} does not reproduce p^s S({name}) at depth {depth}"
                )));
            }
            depths.push(depth);
        }
        Ok(depths)
    }

    /// The sequence described by slot `k` of the rule for `name`, at `depth`.
    fn slot_sequence(&self, name: &str, k: usize, members: &[CohSeq], depth: u32) -> Result<CohSeq> {
        let mut out = CohSeq::zero(self.p, depth);
        if let Some(slot) = self.slot(name, k) {
            for (n, c) in &slot.coeffs {
                let m = members[self.index_of(n).expect("validated")].truncate(depth)?;
                out = out.add(&m.scale(c))?;
            }
            out = out.add(&delta_seq(self.p, depth).scale(&slot.delta))?;
        }
        Ok(out)
    }
}

/// A rules file holds one system per summand, either as a single object or
/// as an array.
pub fn parse_rules_file(text: &str) -> Result<Vec<RuleSystem>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let systems: Vec<RuleSystem> = match value {
        serde_json::Value::Array(_) => {
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?
        }
        _ => vec![serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?],
    };
    for s in &systems {
        s.validate()?;
    }
    Ok(systems)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn hand_written_file_parses_and_round_trips() {
        let sys = RuleSystem::from_json(EXAMPLE_ONE_F).unwrap();
        assert_eq!(sys.root(), "a");
        assert_eq!(sys.slot("b", 2).unwrap().delta, q_int(-9));
        assert!(sys.slot("a", 2).is_none());
        let again = RuleSystem::from_json(&sys.to_json()).unwrap();
        assert_eq!(again, sys);
        assert_eq!(parse_rules_file(EXAMPLE_ONE_F).unwrap(), vec![sys.clone()]);
        let arr = format!("[{EXAMPLE_ONE_F}, {EXAMPLE_ONE_F}]");
        assert_eq!(parse_rules_file(&arr).unwrap().len(), 2);
    }

    #[test]
    fn validation_errors() {
        let bad = EXAMPLE_ONE_F.replace("\"k\": 2", "\"k\": 3");
        assert!(matches!(RuleSystem::from_json(&bad), Err(Error::Invalid(_))));
        let bad = EXAMPLE_ONE_F.replace("{\"a\": \"1\"}, \"delta\"", "{\"z\": \"1\"}, \"delta\"");
        assert!(matches!(RuleSystem::from_json(&bad), Err(Error::Invalid(_))));
        assert!(matches!(RuleSystem::from_json("{"), Err(Error::Parse(_))));
    }
}
