//! Breadth-first closure of `{𝓛(φ)}` under the shift.
//!
//! Each member `b` of depth `d` contributes `p^s S(b)`, split into `p` slots
//! of depth `d - 1`. A slot is matched modulo `QΔ`, in order, against: a pure
//! multiple of `Δ`; the current members; reflections of members that are not
//! themselves members. A reflected match makes the reflection a member. An
//! unmatched slot `v` becomes the new member `v - α(v_0)Δ`.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};

use super::{ElementRule, RuleSystem, SlotRule};
use crate::coherent::{block_decompose, delta_seq, l_of, CohSeq};
use crate::error::{Error, Result};
use crate::gamma::GammaVec;
use crate::grid::GridFn;
use crate::rational::{q_int, Q};

/// Discovery gives up once the basis grows beyond this.
pub const MAX_MEMBERS: usize = 64;

/// A discovered system together with the member sequences it was verified on.
#[derive(Clone, Debug)]
pub struct Discovery {
    pub system: RuleSystem,
    pub members: Vec<CohSeq>,
    /// Per member, the depth to which its rule recombines exactly.
    pub verified_depths: Vec<u32>,
}

impl Discovery {
    pub fn member(&self, name: &str) -> Option<&CohSeq> {
        self.system.index_of(name).map(|i| &self.members[i])
    }
}

enum SlotMatch {
    DeltaOnly(Q),
    Member(usize, Q),
    Reflected(usize, Q),
}

/// `v - cand ∈ QΔ`, compared at the smaller of the two depths. Returns the
/// `Δ` coefficient.
fn delta_difference(v: &CohSeq, cand: &CohSeq) -> Result<Option<Q>> {
    let d = v.depth().min(cand.depth());
    let v = v.truncate(d)?;
    let cand = cand.truncate(d)?;
    let c = v.alpha0() - cand.alpha0();
    Ok((cand.add_delta(&c)? == v).then_some(c))
}

fn unique_match(
    v: &CohSeq,
    candidates: impl Iterator<Item = (usize, CohSeq)>,
    names: &[String],
) -> Result<Option<(usize, Q)>> {
    let mut found: Option<(usize, Q, CohSeq)> = None;
    for (j, cand) in candidates {
        if let Some(c) = delta_difference(v, &cand)? {
            match &found {
                None => found = Some((j, c, cand)),
                Some((i, _, prev)) => {
                    if delta_difference(prev, &cand)? != Some(Q::zero()) {
                        return Err(Error::AmbiguousMatch(format!(
                            "slot of depth {} matches both {} and {}; increase the depth",
                            v.depth(),
                            names[*i],
                            names[j]
                        )));
                    }
                }
            }
        }
    }
    Ok(found.map(|(j, c, _)| (j, c)))
}

fn classify(v: &CohSeq, members: &[CohSeq], names: &[String]) -> Result<Option<SlotMatch>> {
    let a0 = v.alpha0();
    if delta_seq(v.modulus(), v.depth()).scale(&a0) == *v {
        return Ok(Some(SlotMatch::DeltaOnly(a0)));
    }
    if let Some((j, c)) = unique_match(v, members.iter().cloned().enumerate(), names)? {
        return Ok(Some(SlotMatch::Member(j, c)));
    }
    let mut reflections = Vec::new();
    for (j, b) in members.iter().enumerate() {
        let r = b.reflect();
        let mut known = false;
        for m in members {
            if delta_difference(&r, m)?.is_some() {
                known = true;
                break;
            }
        }
        if !known {
            reflections.push((j, r));
        }
    }
    Ok(unique_match(v, reflections.into_iter(), names)?.map(|(j, c)| SlotMatch::Reflected(j, c)))
}

/// Discovery from `φ`, with root `𝓛(φ)` named `root`.
pub fn discover_rules(phi: &GridFn, s: u32, root: &str) -> Result<Discovery> {
    discover_from_grid(phi, s, root)
}

pub fn discover_from_grid(phi: &GridFn, s: u32, root: &str) -> Result<Discovery> {
    if phi.depth() < 2 {
        return Err(Error::Invalid(format!(
            "discovery needs depth at least 2, got {}",
            phi.depth()
        )));
    }
    discover_from_seq(&l_of(phi), s, root)
}

/// Discovery from an explicit coherent root sequence (e.g. a product of
/// one-variable sequences).
pub fn discover_from_seq(root_seq: &CohSeq, s: u32, root: &str) -> Result<Discovery> {
    let p = root_seq.modulus();
    let scale = q_int(p.as_usize().pow(s) as i64);
    let mut names = vec![root.to_string()];
    let mut members = vec![root_seq.clone()];
    let mut rules: Vec<Option<ElementRule>> = vec![None];
    let mut reflections = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);

    while let Some(i) = queue.pop_front() {
        let name = names[i].clone();
        let seq = members[i].clone();
        if seq.depth() < 2 {
            return Err(Error::NoClosure(format!(
                "member {name} has depth {}; its slots are too shallow to match",
                seq.depth()
            )));
        }
        let w: Vec<GammaVec> = seq.shift()?.iter().map(|e| e.scale(&scale)).collect();
        let slots = block_decompose(p, &w)?;
        let mut slot_rules = Vec::new();
        for (k, v) in slots.into_iter().enumerate() {
            let (target, delta) = match classify(&v, &members, &names)? {
                Some(SlotMatch::DeltaOnly(c)) => (None, c),
                Some(SlotMatch::Member(j, c)) => (Some(j), c),
                Some(SlotMatch::Reflected(j, c)) => {
                    let r = members[j].reflect();
                    let rname = format!("R({})", names[j]);
                    reflections.insert(names[j].clone(), rname.clone());
                    reflections.insert(rname.clone(), names[j].clone());
                    names.push(rname);
                    members.push(r);
                    rules.push(None);
                    queue.push_back(members.len() - 1);
                    (Some(members.len() - 1), c)
                }
                None => {
                    let c = v.alpha0();
                    names.push(format!("{name}.{k}"));
                    members.push(v.add_delta(&-c.clone())?);
                    rules.push(None);
                    queue.push_back(members.len() - 1);
                    (Some(members.len() - 1), c)
                }
            };
            if members.len() > MAX_MEMBERS {
                return Err(Error::NoClosure(format!(
                    "basis exceeded {MAX_MEMBERS} members without closing"
                )));
            }
            let coeffs: BTreeMap<String, Q> =
                target.map(|j| (names[j].clone(), Q::one())).into_iter().collect();
            let slot = SlotRule { k, coeffs, delta };
            if !slot.is_zero() {
                slot_rules.push(slot);
            }
        }
        rules[i] = Some(ElementRule { elem: name, slots: slot_rules });
    }

    let alpha0 = names.iter().cloned().zip(members.iter().map(CohSeq::alpha0)).collect();
    let system = RuleSystem {
        p,
        s,
        basis: names,
        alpha0,
        rules: rules.into_iter().map(|r| r.expect("every member processed")).collect(),
        reflections,
    };
    let verified_depths = system.verify(&members)?;
    Ok(Discovery { system, members, verified_depths })
}
