//! Families of `FIN_k` elements and bounded-horizon density machinery.
//!
//! Density of a family over an infinite block sequence cannot be decided, so
//! everything here works with a finite surrogate: a fixed finite `B` and a
//! length `L`, quantifying over every length-`L` block subsequence of `B`
//! drawn from `⟨B⟩`.

use std::collections::HashSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::block::BlockSeq;
use crate::error::{Error, Result};
use crate::fin::{CombPair, FinFn};
use crate::tuples;

type Membership = dyn Fn(&FinFn) -> bool + Send + Sync;
type PairMembership = dyn Fn(&FinFn, &FinFn) -> bool + Send + Sync;

/// A family `F ⊆ FIN_k` given by a pure membership predicate.
#[derive(Clone)]
pub struct FamilyOracle {
    membership: Arc<Membership>,
    description: String,
}

impl FamilyOracle {
    pub fn new<F>(description: impl Into<String>, membership: F) -> Self
    where
        F: Fn(&FinFn) -> bool + Send + Sync + 'static,
    {
        Self { membership: Arc::new(membership), description: description.into() }
    }

    pub fn contains(&self, p: &FinFn) -> bool {
        (self.membership)(p)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn all() -> Self {
        Self::new("all", |_| true)
    }

    pub fn empty() -> Self {
        Self::new("empty", |_| false)
    }

    /// Elements whose values sum to an even number.
    pub fn even_weight() -> Self {
        Self::new("even-weight", |p| p.weight() % 2 == 0)
    }

    /// Elements taking the value `k` at the least index of their support.
    pub fn k_at_min(k: u32) -> Self {
        Self::new(format!("k-at-min(k={k})"), move |p| {
            p.entries().first().is_some_and(|&(_, v)| v == k)
        })
    }

    pub fn from_set(description: impl Into<String>, set: HashSet<FinFn>) -> Self {
        Self::new(description, move |p| set.contains(p))
    }

    /// One of the named families accepted on the command line.
    pub fn builtin(name: &str, k: u32) -> Result<Self> {
        match name {
            "all" => Ok(Self::all()),
            "empty" => Ok(Self::empty()),
            "even-weight" => Ok(Self::even_weight()),
            "k-at-min" => Ok(Self::k_at_min(k)),
            other => Err(Error::Invalid(format!("unknown family {other:?}"))),
        }
    }

    /// `F/p = {q ∈ F : p < q}`.
    pub fn restrict_past(&self, p: &FinFn) -> Result<Self> {
        let bound = p.max_supp().ok_or(Error::EmptySupport)?;
        let inner = self.membership.clone();
        Ok(Self::new(format!("{}/{}", self.description, p), move |q| {
            q.min_supp().is_some_and(|m| m > bound) && inner(q)
        }))
    }

    pub fn union(&self, other: &FamilyOracle) -> Self {
        let (a, b) = (self.membership.clone(), other.membership.clone());
        Self::new(format!("{} | {}", self.description, other.description), move |p| a(p) || b(p))
    }
}

impl fmt::Debug for FamilyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyOracle").field("description", &self.description).finish()
    }
}

/// A family of increasing pairs `(p, q)`, `p < q`.
#[derive(Clone)]
pub struct PairFamilyOracle {
    membership: Arc<PairMembership>,
    description: String,
}

impl PairFamilyOracle {
    pub fn new<F>(description: impl Into<String>, membership: F) -> Self
    where
        F: Fn(&FinFn, &FinFn) -> bool + Send + Sync + 'static,
    {
        Self { membership: Arc::new(membership), description: description.into() }
    }

    pub fn contains(&self, p: &FinFn, q: &FinFn) -> bool {
        (self.membership)(p, q)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

impl fmt::Debug for PairFamilyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairFamilyOracle").field("description", &self.description).finish()
    }
}

/// Membership of increasing tuples, the objects of `⟨B⟩^{(d)}`.
pub trait TupleFamily: Send + Sync {
    fn contains_tuple(&self, tuple: &[FinFn]) -> bool;
}

impl TupleFamily for FamilyOracle {
    /// A tuple belongs when its (disjoint) sum does; 1-tuples are plain elements.
    fn contains_tuple(&self, tuple: &[FinFn]) -> bool {
        match tuple {
            [single] => self.contains(single),
            _ => {
                let mut sum = FinFn::null();
                for x in tuple {
                    match sum.checked_add(x) {
                        Ok(s) => sum = s,
                        Err(_) => return false,
                    }
                }
                self.contains(&sum)
            }
        }
    }
}

impl TupleFamily for PairFamilyOracle {
    fn contains_tuple(&self, tuple: &[FinFn]) -> bool {
        matches!(tuple, [p, q] if self.contains(p, q))
    }
}

/// Outcome of a bounded density check.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub dense: bool,
    /// First subsequence `C` (canonical order) with `F ∩ ⟨C⟩^{(d)} = ∅`.
    pub failing_subsequence: Option<BlockSeq>,
    /// One hit per subsequence checked before the verdict.
    pub witnesses: Vec<(BlockSeq, Vec<FinFn>)>,
    pub subsequences_checked: u64,
}

struct Branch {
    witnesses: Vec<(BlockSeq, Vec<FinFn>)>,
    failing: Option<BlockSeq>,
    checked: u64,
    capped: bool,
}

fn first_hit<F: TupleFamily + ?Sized>(family: &F, c: &BlockSeq, d: usize) -> Option<Vec<FinFn>> {
    let span = c.span();
    tuples::walk(&span, d, |_| true, |t| {
        let tuple: Vec<FinFn> = t.iter().map(|&i| span[i].clone()).collect();
        if family.contains_tuple(&tuple) {
            ControlFlow::Break(tuple)
        } else {
            ControlFlow::Continue(())
        }
    })
}

/// Checks `F ∩ ⟨C⟩^{(d)} ≠ ∅` for every length-`L` block subsequence `C ≼ B`
/// whose elements come from `⟨B⟩`.
///
/// `cap` bounds the number of subsequences examined; exceeding it is
/// [`Error::CapExceeded`] (inconclusive), never a silent truncation.
pub fn density_check<F: TupleFamily + ?Sized>(
    family: &F,
    b: &BlockSeq,
    len: usize,
    d: usize,
    cap: u64,
) -> Result<DensityReport> {
    if len == 0 || d == 0 {
        return Err(Error::Invalid("L and d must be positive".into()));
    }
    if len > b.len() {
        return Err(Error::HorizonTooLong { len, available: b.len() });
    }
    let span = b.span();
    let branches: Vec<Branch> = (0..span.len())
        .into_par_iter()
        .map(|first| {
            let mut branch = Branch { witnesses: Vec::new(), failing: None, checked: 0, capped: false };
            tuples::walk_from(&span, len, &[first], &mut |_| true, &mut |t: &[usize]| {
                if branch.checked >= cap {
                    branch.capped = true;
                    return ControlFlow::Break(());
                }
                branch.checked += 1;
                let c = BlockSeq::new(t.iter().map(|&i| span[i].clone()).collect(), b.k())
                    .expect("increasing span elements form a block sequence");
                match first_hit(family, &c, d) {
                    Some(hit) => {
                        branch.witnesses.push((c, hit));
                        ControlFlow::Continue(())
                    }
                    None => {
                        branch.failing = Some(c);
                        ControlFlow::Break(())
                    }
                }
            });
            branch
        })
        .collect();

    let mut report = DensityReport {
        dense: true,
        failing_subsequence: None,
        witnesses: Vec::new(),
        subsequences_checked: 0,
    };
    for branch in branches {
        report.subsequences_checked += branch.checked;
        report.witnesses.extend(branch.witnesses);
        if report.subsequences_checked > cap || (branch.capped && branch.failing.is_none()) {
            return Err(Error::CapExceeded(cap));
        }
        if let Some(c) = branch.failing {
            report.dense = false;
            report.failing_subsequence = Some(c);
            break;
        }
    }
    Ok(report)
}

/// Bounded search for a piece of a finite partition that is dense on some
/// block subsequence.
///
/// Follows the pigeonhole argument for coideals: if piece `m` fails on some
/// `C'`, move into `C'` and try the remaining pieces there.
pub fn partition_refine<F: TupleFamily>(
    parts: &[F],
    b: &BlockSeq,
    len: usize,
    d: usize,
    cap: u64,
) -> Result<(usize, BlockSeq)> {
    let mut current = b.clone();
    for (m, part) in parts.iter().enumerate() {
        let report = density_check(part, &current, len, d, cap)?;
        if report.dense {
            return Ok((m, current));
        }
        current = report.failing_subsequence.expect("non-dense report names a subsequence");
    }
    Err(Error::Exhausted(format!(
        "no piece of the {}-part partition is dense at horizon L={len}",
        parts.len()
    )))
}

/// Which construction produced a [`Lemma4Witness`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma4Route {
    /// The pivot block is the extreme block of the code, as in the textbook construction.
    Direct,
    /// The extreme block sits too low for `T^i`; earlier (or later) blocks of
    /// `r` are folded wholesale into `p` (or `q`).
    Extended,
}

/// A verified pair `(p, q) ∈ ⟨C⟩^{(2)}` with `T^i p + T^j q = r ∈ F`.
#[derive(Clone, Debug, Serialize)]
pub struct Lemma4Witness {
    pub p: FinFn,
    pub q: FinFn,
    pub r: FinFn,
    /// The grouped sequence `C'` searched for `r`.
    pub grouped: BlockSeq,
    /// Code of `r` over `C'`.
    pub code: FinFn,
    /// Block of `C'` split between `p` and `q`.
    pub pivot: usize,
    /// First (or, mirrored, last) generator offset inside the pivot block that survives `T^i`.
    pub first_live: usize,
    pub route: Lemma4Route,
    pub candidates_scanned: u64,
}

fn sum_terms(terms: impl IntoIterator<Item = FinFn>) -> FinFn {
    terms.into_iter().fold(FinFn::null(), |acc, t| {
        acc.checked_add(&t).expect("terms are drawn from disjoint generators")
    })
}

/// Groups `C` into the sequence `C'` used by [`lemma4_witness`].
///
/// For `j = 0`: `c'_n = Σ_{l=0}^{i} T^{i-l} c_{(i+2)n+l} + c_{(i+2)n+i+1}`.
/// For `i = 0`, `j > 0` the block is reflected:
/// `c'_n = c_{(j+2)n} + Σ_{l=0}^{j} T^{l} c_{(j+2)n+1+l}`.
pub fn grouped_sequence(c: &BlockSeq, ij: CombPair) -> Result<BlockSeq> {
    ij.check(c.k())?;
    let width = (ij.i + ij.j + 2) as usize;
    let blocks = c.len() / width;
    if blocks == 0 {
        return Err(Error::HorizonTooLong { len: width, available: c.len() });
    }
    let gens = c.elems();
    let elems = (0..blocks)
        .map(|n| {
            let base = width * n;
            if ij.j == 0 {
                let i = ij.i;
                sum_terms(
                    (0..=i as usize)
                        .map(|l| gens[base + l].tetris_iter(i - l as u32))
                        .chain(std::iter::once(gens[base + i as usize + 1].clone())),
                )
            } else {
                let j = ij.j;
                sum_terms(
                    std::iter::once(gens[base].clone())
                        .chain((0..=j as usize).map(|l| gens[base + 1 + l].tetris_iter(l as u32))),
                )
            }
        })
        .collect();
    BlockSeq::new(elems, c.k())
}

/// Constructive form of the pair-splitting lemma: for `F` meeting `⟨C'⟩`,
/// find `(p, q) ∈ ⟨C⟩^{(2)}` with `T^i p + T^j q ∈ F`.
///
/// `r` is the first member of `F ∩ ⟨C'⟩` in canonical code order, scanning at
/// most `budget` codes. The returned witness is always re-verified.
pub fn lemma4_witness(
    family: &FamilyOracle,
    c: &BlockSeq,
    ij: CombPair,
    budget: u64,
) -> Result<Lemma4Witness> {
    let k = c.k();
    let grouped = grouped_sequence(c, ij)?;
    let mut scanned = 0u64;
    let mut found = None;
    for code in grouped.codes() {
        if scanned >= budget {
            return Err(Error::BudgetExhausted(budget));
        }
        scanned += 1;
        let r = grouped.encode(&code)?;
        if family.contains(&r) {
            found = Some((code, r));
            break;
        }
    }
    let (code, r) = found.ok_or_else(|| {
        Error::Exhausted(format!("{} misses ⟨C'⟩ entirely", family.description()))
    })?;

    let gens = c.elems();
    let width = (ij.i + ij.j + 2) as usize;
    let shift = |v: u32| k - v;
    let (p, q, pivot, first_live, route) = if ij.j == 0 {
        let i = ij.i;
        let pivot_pos = code
            .entries()
            .iter()
            .position(|&(_, v)| shift(v) <= i)
            .expect("a code in FIN_k attains k");
        let (pivot, v) = code.entries()[pivot_pos];
        let s = shift(v);
        let base = width * pivot;
        let first_live = (0..=i).find(|&l| s + i - l < k).expect("l = i always survives") as usize;
        let head = code.entries()[..pivot_pos]
            .iter()
            .map(|&(n, w)| grouped.elems()[n].tetris_iter(shift(w) - i));
        let p = sum_terms(
            head.chain((first_live..=s as usize).map(|l| gens[base + l].tetris_iter(s - l as u32))),
        );
        let tail = code.entries()[pivot_pos + 1..]
            .iter()
            .map(|&(n, w)| grouped.elems()[n].tetris_iter(shift(w)));
        let q = sum_terms(
            (s as usize + 1..=i as usize)
                .map(|l| gens[base + l].tetris_iter(s + i - l as u32))
                .chain(std::iter::once(gens[base + i as usize + 1].tetris_iter(s)))
                .chain(tail),
        );
        let route = if pivot_pos == 0 { Lemma4Route::Direct } else { Lemma4Route::Extended };
        (p, q, pivot, first_live, route)
    } else {
        let j = ij.j;
        let entries = code.entries();
        let pivot_pos = entries
            .iter()
            .rposition(|&(_, v)| shift(v) <= j)
            .expect("a code in FIN_k attains k");
        let (pivot, v) = entries[pivot_pos];
        let s = shift(v);
        let base = width * pivot;
        let last_live = (0..=j).rev().find(|&l| s + l < k).expect("l = j - s always survives") as usize;
        let head = entries[..pivot_pos]
            .iter()
            .map(|&(n, w)| grouped.elems()[n].tetris_iter(shift(w)));
        let p = sum_terms(
            head.chain(std::iter::once(gens[base].tetris_iter(s)))
                .chain((0..(j - s) as usize).map(|l| gens[base + 1 + l].tetris_iter(s + l as u32))),
        );
        let tail = entries[pivot_pos + 1..]
            .iter()
            .map(|&(n, w)| grouped.elems()[n].tetris_iter(shift(w) - j));
        let q = sum_terms(
            ((j - s) as usize..=last_live)
                .map(|l| gens[base + 1 + l].tetris_iter(s + l as u32 - j))
                .chain(tail),
        );
        let route = if pivot_pos + 1 == entries.len() {
            Lemma4Route::Direct
        } else {
            Lemma4Route::Extended
        };
        (p, q, pivot, last_live, route)
    };

    let witness = Lemma4Witness {
        p,
        q,
        r,
        grouped,
        code,
        pivot,
        first_live,
        route,
        candidates_scanned: scanned,
    };
    verify_lemma4(family, c, ij, &witness)?;
    if route == Lemma4Route::Extended {
        log::info!(
            "pair-splitting witness for {ij} used the extended route (pivot block {pivot}, code {})",
            witness.code
        );
    }
    Ok(witness)
}

fn verify_lemma4(family: &FamilyOracle, c: &BlockSeq, ij: CombPair, w: &Lemma4Witness) -> Result<()> {
    let fail = |what: &str| {
        Err(Error::Verification(format!(
            "pair-splitting witness for {ij}: {what} (p={}, q={}, r={})",
            w.p, w.q, w.r
        )))
    };
    if !c.contains(&w.p) || !c.contains(&w.q) {
        return fail("p or q outside ⟨C⟩");
    }
    if !w.p.precedes(&w.q) {
        return fail("p < q fails");
    }
    if ij.combine(&w.p, &w.q).ok().as_ref() != Some(&w.r) {
        return fail("T^i p + T^j q differs from r");
    }
    if !family.contains(&w.r) {
        return fail("r outside F");
    }
    Ok(())
}

/// The pair family `F(i,j) = {(p,q) ∈ ⟨T^{i+j}B⟩^{(2)} : T_B^i p + T_B^j q ∈ F}`.
///
/// Evaluated as `T^j(T_B^{i+j} p) + T^i(T_B^{i+j} q)`, using `T T_B = id`.
pub fn family_ij(family: &FamilyOracle, b: &BlockSeq, ij: CombPair) -> Result<PairFamilyOracle> {
    let base = pair_base(b, ij)?;
    let (family, b) = (family.clone(), b.clone());
    let description = format!("{}({},{})", family.description(), ij.i, ij.j);
    Ok(PairFamilyOracle::new(description, move |p, q| {
        pair_member(&family, &b, &base, ij, p, q).unwrap_or(false)
    }))
}

fn pair_base(b: &BlockSeq, ij: CombPair) -> Result<BlockSeq> {
    ij.check(b.k())?;
    let depth = ij.i + ij.j;
    if b.k() <= depth {
        return Err(Error::Invalid(format!("need k > i + j, got k = {}", b.k())));
    }
    b.tetris_image_iter(depth)
}

fn pair_member(
    family: &FamilyOracle,
    b: &BlockSeq,
    base: &BlockSeq,
    ij: CombPair,
    p: &FinFn,
    q: &FinFn,
) -> Result<bool> {
    for x in [p, q] {
        if !base.contains(x) {
            return Err(Error::NotInSpan(x.to_string()));
        }
    }
    if !p.less_than(q)? {
        return Ok(false);
    }
    let depth = ij.i + ij.j;
    let lp = b.lift_iter(p, depth)?;
    let lq = b.lift_iter(q, depth)?;
    let x = lp.tetris_iter(ij.j).checked_add(&lq.tetris_iter(ij.i))?;
    Ok(family.contains(&x))
}

/// Fallible membership in `F(i,j)`; arguments outside `⟨T^{i+j}B⟩` are errors.
pub fn family_ij_contains(
    family: &FamilyOracle,
    b: &BlockSeq,
    ij: CombPair,
    p: &FinFn,
    q: &FinFn,
) -> Result<bool> {
    let base = pair_base(b, ij)?;
    pair_member(family, b, &base, ij, p, q)
}

/// `F` is `(i,j)`-closed over `B` when `T^i p + T^j q ∈ F` for all
/// `(p,q) ∈ ⟨B⟩^{(2)}`. Returns the first violating pair, if any.
pub fn is_closed_over(
    family: &FamilyOracle,
    b: &BlockSeq,
    ij: CombPair,
) -> Result<Option<(FinFn, FinFn)>> {
    ij.check(b.k())?;
    let span = b.span();
    Ok(first_violation(family, &span, ij))
}

fn first_violation(family: &FamilyOracle, span: &[FinFn], ij: CombPair) -> Option<(FinFn, FinFn)> {
    tuples::walk(span, 2, |_| true, |t| {
        let (p, q) = (&span[t[0]], &span[t[1]]);
        let x = ij.combine(p, q).expect("increasing pair");
        if family.contains(&x) {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break((p.clone(), q.clone()))
        }
    })
}

/// Backtracking search for the first (canonical order) length-`L` block
/// subsequence `C ≼ B`, elements from `⟨B⟩`, over which `F` is
/// `(i,j)`-closed. Prefixes that are not closed are pruned, since closure is
/// inherited by block subsequences.
pub fn closure_search(
    family: &FamilyOracle,
    b: &BlockSeq,
    ij: CombPair,
    len: usize,
) -> Result<BlockSeq> {
    ij.check(b.k())?;
    if len == 0 {
        return Err(Error::Invalid("L must be positive".into()));
    }
    if len > b.len() {
        return Err(Error::HorizonTooLong { len, available: b.len() });
    }
    let span = b.span();
    let k = b.k();
    let closed = |t: &[usize]| {
        let c = BlockSeq::new(t.iter().map(|&i| span[i].clone()).collect(), k)
            .expect("increasing span elements form a block sequence");
        first_violation(family, &c.span(), ij).is_none().then_some(c)
    };
    let hit = (0..span.len()).into_par_iter().find_map_first(|first| {
        if span[first].is_null() {
            return None;
        }
        tuples::walk_from(&span, len, &[first], &mut |t: &[usize]| closed(t).is_some(), &mut |t: &[usize]| {
            match closed(t) {
                Some(c) => ControlFlow::Break(c),
                None => ControlFlow::Continue(()),
            }
        })
    });
    hit.ok_or_else(|| {
        Error::Exhausted(format!(
            "no length-{len} block subsequence of the given B is {ij}-closed for {}",
            family.description()
        ))
    })
}
