//! The finite content of the `FIN_k` theorem.
//!
//! If a family `F` contains a block sequence `B` and is `(i,j)`-closed over
//! `B` for every `(i,j) ∈ Comb_k`, then `⟨B⟩ ⊆ F`. [`derive_membership`]
//! produces a checkable chain of closure steps for each span element;
//! [`verify_span_subset`] is the direct exhaustive check it is compared against.

mod search;

pub use search::{
    find_mono, finite_gowers_holds, gowers_number, Colored, ColoringTable, GowersInstance,
    GowersNumber, SearchMode, SearchOutcome,
};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::block::BlockSeq;
use crate::dense::{is_closed_over, FamilyOracle};
use crate::error::{Error, Result};
use crate::fin::{comb, FinFn};

/// `b_n = b'_{2n} + b'_{2n+1}`.
pub fn pair_up(b: &BlockSeq) -> Result<BlockSeq> {
    if !b.len().is_multiple_of(2) || b.is_empty() {
        return Err(Error::OddLength(b.len()));
    }
    let elems = b
        .elems()
        .chunks(2)
        .map(|pair| pair[0].checked_add(&pair[1]))
        .collect::<Result<Vec<_>>>()?;
    BlockSeq::new(elems, b.k())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "UPPERCASE")]
pub enum Rule {
    /// Start from the generator `b_n`.
    Base { generator: usize },
    /// `T^i b_n + previous`, an `(i,0)`-closure instance.
    Left { i: u32, generator: usize },
    /// `previous + T^j b_n`, a `(0,j)`-closure instance.
    Right { j: u32, generator: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub element: FinFn,
    #[serde(flatten)]
    pub rule: Rule,
}

/// A chain of closure steps from one generator to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub target: FinFn,
    pub steps: Vec<Step>,
}

impl DerivationTrace {
    /// Recomputes every step from its rule, checking the recorded elements,
    /// and returns the final element.
    pub fn replay(&self, b: &BlockSeq) -> Result<FinFn> {
        let gen = |n: usize| {
            b.elems()
                .get(n)
                .cloned()
                .ok_or(Error::CodeOutOfRange { index: n, len: b.len() })
        };
        let mut current: Option<FinFn> = None;
        for (pos, step) in self.steps.iter().enumerate() {
            let next = match (step.rule, &current) {
                (Rule::Base { generator }, None) => {
                    let g = gen(generator)?;
                    if !g.is_fin_k(b.k()) {
                        return Err(Error::Verification("base step is not a generator".into()));
                    }
                    g
                }
                (Rule::Left { i, generator }, Some(prev)) => {
                    let term = gen(generator)?.tetris_iter(i);
                    if !term.less_than(prev)? {
                        return Err(Error::Verification(format!("step {pos}: left term is not below")));
                    }
                    term.checked_add(prev)?
                }
                (Rule::Right { j, generator }, Some(prev)) => {
                    let term = gen(generator)?.tetris_iter(j);
                    if !prev.less_than(&term)? {
                        return Err(Error::Verification(format!("step {pos}: right term is not above")));
                    }
                    prev.checked_add(&term)?
                }
                _ => {
                    return Err(Error::Verification(format!(
                        "step {pos}: BASE must come first and only once"
                    )))
                }
            };
            if next != step.element {
                return Err(Error::Verification(format!(
                    "step {pos}: recorded {} but rule gives {next}",
                    step.element
                )));
            }
            current = Some(next);
        }
        let last = current.ok_or_else(|| Error::Verification("empty trace".into()))?;
        if last != self.target {
            return Err(Error::Verification(format!(
                "trace ends at {last}, target is {}",
                self.target
            )));
        }
        Ok(last)
    }
}

/// Checks the hypotheses of the closure-implies-span argument: `B ⊆ F` and
/// `F` is `(i,j)`-closed over `B` for all `(i,j) ∈ Comb_k`.
pub fn check_preconditions(family: &FamilyOracle, b: &BlockSeq) -> Result<()> {
    if let Some((n, g)) = b.elems().iter().enumerate().find(|(_, g)| !family.contains(g)) {
        return Err(Error::Verification(format!("generator b_{n} = {g} is not in F")));
    }
    for ij in comb(b.k())? {
        if let Some((p, q)) = is_closed_over(family, b, ij)? {
            return Err(Error::Verification(format!(
                "F is not {ij}-closed over B: pair ({p}, {q})"
            )));
        }
    }
    Ok(())
}

/// Builds `p ∈ ⟨B⟩` from generators by closure steps, querying `F` at every
/// intermediate element.
///
/// Starts at the first code position `n_0` with value `k`, consumes positions
/// below `n_0` in descending order on the left, then positions above `n_0` in
/// ascending order on the right. Every intermediate element therefore attains
/// `k`.
pub fn derive_membership(
    family: &FamilyOracle,
    b: &BlockSeq,
    p: &FinFn,
    check_hypotheses: bool,
) -> Result<DerivationTrace> {
    if check_hypotheses {
        check_preconditions(family, b)?;
    }
    let k = b.k();
    let code = b.decode(p)?;
    let entries = code.entries();
    let pivot = entries
        .iter()
        .position(|&(_, v)| v == k)
        .expect("codes attain k");
    let gens = b.elems();
    let n0 = entries[pivot].0;
    let mut steps = vec![Step { element: gens[n0].clone(), rule: Rule::Base { generator: n0 } }];
    let mut current = gens[n0].clone();

    let below = entries[..pivot].iter().rev().map(|&(n, v)| (n, v, true));
    let above = entries[pivot + 1..].iter().map(|&(n, v)| (n, v, false));
    for (n, v, left) in below.chain(above) {
        let exp = k - v;
        let term = gens[n].tetris_iter(exp);
        let (next, rule) = if left {
            (term.checked_add(&current)?, Rule::Left { i: exp, generator: n })
        } else {
            (current.checked_add(&term)?, Rule::Right { j: exp, generator: n })
        };
        if !family.contains(&next) {
            let (lhs, rhs, ij) = if left {
                (gens[n].clone(), current.clone(), format!("({exp},0)"))
            } else {
                (current.clone(), gens[n].clone(), format!("(0,{exp})"))
            };
            return Err(Error::Verification(format!(
                "{next} rejected by F: violates {ij}-closure at pair ({lhs}, {rhs})"
            )));
        }
        steps.push(Step { element: next.clone(), rule });
        current = next;
    }
    debug_assert_eq!(&current, p);
    Ok(DerivationTrace { target: p.clone(), steps })
}

/// Exhaustive check of `⟨B⟩ ⊆ F`; returns the first missing span element.
pub fn verify_span_subset(family: &FamilyOracle, b: &BlockSeq) -> Option<FinFn> {
    b.span().into_iter().find(|p| !family.contains(p))
}

/// The least family containing `B` and closed under `(p, q) ↦ T^i p + T^j q`
/// for increasing pairs of its own members and all `(i,j) ∈ Comb_k`.
pub fn comb_closure(b: &BlockSeq) -> Result<HashSet<FinFn>> {
    let ops = comb(b.k())?;
    let mut members: Vec<FinFn> = b.elems().to_vec();
    let mut seen: HashSet<FinFn> = members.iter().cloned().collect();
    // semi-naive: each round only pairs involving at least one new member
    let mut frontier_start = 0;
    while frontier_start < members.len() {
        let frontier_end = members.len();
        let mut fresh = Vec::new();
        for x in 0..frontier_end {
            for y in frontier_start..frontier_end {
                for (p, q) in [(&members[x], &members[y]), (&members[y], &members[x])] {
                    if !p.precedes(q) {
                        continue;
                    }
                    for ij in &ops {
                        let s = ij.combine(p, q).expect("increasing pair");
                        if seen.insert(s.clone()) {
                            fresh.push(s);
                        }
                    }
                }
            }
        }
        frontier_start = frontier_end;
        members.extend(fresh);
    }
    Ok(seen)
}
