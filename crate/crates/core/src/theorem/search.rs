//! Finite Gowers / GMTT instances: colorings of `FIN_k([n])`, the functions
//! in `FIN_k` supported in `[0, n)`.
//!
//! An instance holds when every `r`-coloring admits a length-`d` block
//! sequence `B` inside `FIN_k([n])` whose span is monochromatic (or, in tuple
//! mode, whose `⟨B⟩^{(d)}` is monochromatic for a coloring of increasing
//! `d`-tuples).

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::block::BlockSeq;
use crate::dsl::ColoringExpr;
use crate::error::{Error, Result};
use crate::fin::{fin_k_within, FinFn};
use crate::tuples;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Every coloring in lexicographic order, no symmetry reduction.
    Exhaustive,
    /// Depth-first over partial colorings, relabelling colors in first-seen
    /// order and backtracking as soon as a monochromatic witness is complete.
    Pruned,
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "pruned" => Ok(SearchMode::Pruned),
            other => Err(Error::Invalid(format!("unknown search mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GowersInstance {
    pub k: u32,
    pub d: usize,
    pub r: u32,
    pub n: usize,
    /// Color increasing `d`-tuples instead of elements.
    pub tuples: bool,
}

impl GowersInstance {
    pub fn new(k: u32, d: usize, r: u32, n: usize) -> Self {
        Self { k, d, r, n, tuples: false }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.r == 0 {
            return Err(Error::Invalid("k, d and r must be positive".into()));
        }
        if self.r > u32::from(u8::MAX) {
            return Err(Error::Invalid("at most 255 colors".into()));
        }
        Ok(())
    }
}

/// A colored object: an element, or an increasing tuple in tuple mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum Colored {
    Elem(FinFn),
    Tuple(Vec<FinFn>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColorEntry {
    pub object: Colored,
    pub color: u32,
}

/// An explicit coloring of every object of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ColoringTable(pub Vec<ColorEntry>);

impl ColoringTable {
    pub fn color_of(&self, object: &Colored) -> Option<u32> {
        self.0.iter().find(|e| &e.object == object).map(|e| e.color)
    }

    /// Independent check that no length-`d` block sequence in `FIN_k([n])`
    /// has a monochromatic span (or `⟨B⟩^{(d)}`) under this table.
    pub fn is_bad_for(&self, inst: &GowersInstance) -> bool {
        let lookup: HashMap<&Colored, u32> = self.0.iter().map(|e| (&e.object, e.color)).collect();
        let universe = fin_k_within(inst.k, inst.n);
        if lookup.len() != expected_objects(inst, &universe) {
            return false;
        }
        let k = inst.k;
        for t in tuples::all(&universe, inst.d) {
            let b = BlockSeq::new(t.iter().map(|&i| universe[i].clone()).collect(), k)
                .expect("increasing elements");
            let objects: Vec<Colored> = if inst.tuples {
                b.span_tuples(inst.d).expect("d > 0").into_iter().map(Colored::Tuple).collect()
            } else {
                b.span().into_iter().map(Colored::Elem).collect()
            };
            let colors: Option<Vec<u32>> = objects.iter().map(|o| lookup.get(o).copied()).collect();
            match colors {
                Some(cs) if cs.windows(2).all(|w| w[0] == w[1]) => return false,
                Some(_) => {}
                None => return false,
            }
        }
        true
    }
}

fn expected_objects(inst: &GowersInstance, universe: &[FinFn]) -> usize {
    if inst.tuples {
        tuples::all(universe, inst.d).len()
    } else {
        universe.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub holds: bool,
    /// Lexicographically first coloring without a monochromatic witness.
    pub bad_coloring: Option<ColoringTable>,
    #[serde(skip)]
    pub nodes_visited: u64,
}

/// Objects of an instance and, for every candidate block sequence, the
/// sorted object indices its span (or tuple span) occupies.
struct Board {
    objects: Vec<Colored>,
    witnesses: Vec<Vec<usize>>,
}

impl Board {
    fn build(inst: &GowersInstance) -> Board {
        let universe = fin_k_within(inst.k, inst.n);
        let objects: Vec<Colored> = if inst.tuples {
            tuples::all(&universe, inst.d)
                .into_iter()
                .map(|t| Colored::Tuple(t.into_iter().map(|i| universe[i].clone()).collect()))
                .collect()
        } else {
            universe.iter().cloned().map(Colored::Elem).collect()
        };
        let index: HashMap<&Colored, usize> = objects.iter().enumerate().map(|(i, o)| (o, i)).collect();
        let mut witnesses = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for t in tuples::all(&universe, inst.d) {
            let b = BlockSeq::new(t.iter().map(|&i| universe[i].clone()).collect(), inst.k)
                .expect("increasing elements");
            let mut members: Vec<usize> = if inst.tuples {
                b.span_tuples(inst.d)
                    .expect("d > 0")
                    .into_iter()
                    .map(|tuple| index[&Colored::Tuple(tuple)])
                    .collect()
            } else {
                b.span().into_iter().map(|x| index[&Colored::Elem(x)]).collect()
            };
            members.sort_unstable();
            members.dedup();
            if seen.insert(members.clone()) {
                witnesses.push(members);
            }
        }
        Board { objects, witnesses }
    }

    fn table(&self, colors: &[u8]) -> ColoringTable {
        ColoringTable(
            self.objects
                .iter()
                .zip(colors)
                .map(|(o, &c)| ColorEntry { object: o.clone(), color: u32::from(c) })
                .collect(),
        )
    }
}

/// Decides a finite instance.
///
/// Both modes return the lexicographically first bad coloring (objects in
/// canonical order, colors as digits), so their outputs agree exactly.
/// `cap` bounds `r^{#objects}` in exhaustive mode.
pub fn finite_gowers_holds(inst: &GowersInstance, mode: SearchMode, cap: u64) -> Result<SearchOutcome> {
    inst.validate()?;
    let board = Board::build(inst);
    let nodes = AtomicU64::new(0);
    let bad = match mode {
        SearchMode::Exhaustive => exhaustive(&board, inst.r, cap, &nodes)?,
        SearchMode::Pruned => pruned(&board, inst.r, &nodes),
    };
    Ok(SearchOutcome {
        holds: bad.is_none(),
        bad_coloring: bad.map(|c| board.table(&c)),
        nodes_visited: nodes.into_inner(),
    })
}

const CHUNK: u64 = 1 << 16;

fn exhaustive(board: &Board, r: u32, cap: u64, nodes: &AtomicU64) -> Result<Option<Vec<u8>>> {
    let m = board.objects.len();
    let total = u128::from(r).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > u128::from(cap) {
        return Err(Error::CapExceeded(cap));
    }
    let total = total as u64;
    let chunks = total.div_ceil(CHUNK);

    if r == 2 && m < 64 {
        // object o is bit m-1-o, so numeric order is lexicographic order
        let masks: Vec<u64> = board
            .witnesses
            .iter()
            .map(|w| w.iter().fold(0u64, |acc, &o| acc | 1 << (m - 1 - o)))
            .collect();
        let hit = (0..chunks).into_par_iter().find_map_first(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(total);
            nodes.fetch_add(hi - lo, Ordering::Relaxed);
            (lo..hi).find(|&c| {
                !masks.iter().any(|&w| {
                    let x = c & w;
                    x == 0 || x == w
                })
            })
        });
        return Ok(hit.map(|c| (0..m).map(|o| ((c >> (m - 1 - o)) & 1) as u8).collect()));
    }

    let hit = (0..chunks).into_par_iter().find_map_first(|chunk| {
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(total);
        nodes.fetch_add(hi - lo, Ordering::Relaxed);
        let mut digits = vec![0u8; m];
        let mut rest = lo;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % u64::from(r)) as u8;
            rest /= u64::from(r);
        }
        for _ in lo..hi {
            let mono = board.witnesses.iter().any(|w| w.iter().all(|&o| digits[o] == digits[w[0]]));
            if !mono {
                return Some(digits);
            }
            for slot in digits.iter_mut().rev() {
                *slot += 1;
                if u32::from(*slot) < r {
                    break;
                }
                *slot = 0;
            }
        }
        None
    });
    Ok(hit)
}

struct Pruner<'a> {
    by_last: Vec<Vec<&'a [usize]>>,
    r: u8,
    nodes: &'a AtomicU64,
}

impl Pruner<'_> {
    fn completes_mono(&self, colors: &[u8], pos: usize) -> bool {
        self.by_last[pos]
            .iter()
            .any(|w| w.iter().all(|&o| colors[o] == colors[pos]))
    }

    fn children(&self, colors: &[u8], used: u8) -> std::ops::Range<u8> {
        let _ = colors;
        0..(used + 1).min(self.r)
    }

    /// Depth-first completion of `colors`; `used` counts distinct colors so far.
    fn dfs(&self, colors: &mut Vec<u8>, used: u8) -> Option<Vec<u8>> {
        let pos = colors.len();
        if pos == self.by_last.len() {
            return Some(colors.clone());
        }
        let mut local = 0;
        for c in self.children(colors, used) {
            local += 1;
            colors.push(c);
            if !self.completes_mono(colors, pos) {
                if let Some(found) = self.dfs(colors, used.max(c + 1)) {
                    self.nodes.fetch_add(local, Ordering::Relaxed);
                    return Some(found);
                }
            }
            colors.pop();
        }
        self.nodes.fetch_add(local, Ordering::Relaxed);
        None
    }
}

const SPLIT_TARGET: usize = 256;

fn pruned(board: &Board, r: u32, nodes: &AtomicU64) -> Option<Vec<u8>> {
    let m = board.objects.len();
    let mut by_last: Vec<Vec<&[usize]>> = vec![Vec::new(); m];
    for w in &board.witnesses {
        if let Some(&last) = w.last() {
            by_last[last].push(w);
        }
    }
    let pruner = Pruner { by_last, r: r as u8, nodes };

    // expand prefixes breadth-first, keeping lexicographic order, then hand
    // them to workers; find_map_first keeps the sequential answer
    let mut frontier: Vec<(Vec<u8>, u8)> = vec![(Vec::new(), 0)];
    while frontier.len() < SPLIT_TARGET && frontier.first().is_some_and(|(c, _)| c.len() < m) {
        let mut next = Vec::new();
        for (colors, used) in frontier {
            let pos = colors.len();
            for c in pruner.children(&colors, used) {
                let mut child = colors.clone();
                child.push(c);
                if !pruner.completes_mono(&child, pos) {
                    next.push((child, used.max(c + 1)));
                }
            }
        }
        nodes.fetch_add(next.len() as u64, Ordering::Relaxed);
        frontier = next;
        if frontier.is_empty() {
            return None;
        }
    }
    frontier
        .into_par_iter()
        .find_map_first(|(mut colors, used)| pruner.dfs(&mut colors, used))
}

#[derive(Clone, Debug, Serialize)]
pub struct GowersNumber {
    /// Least `n ≤ n_max` for which the instance holds; `None` means unknown beyond `n_max`.
    pub least: Option<usize>,
    pub n_max: usize,
    /// Whether `n + 1` was also checked to hold.
    pub next_checked: bool,
    #[serde(skip)]
    pub nodes_visited: u64,
}

/// Least `n ≤ n_max` such that every `r`-coloring of `FIN_k([n])` has a
/// monochromatic length-`d` block sequence, by pruned search.
pub fn gowers_number(k: u32, d: usize, r: u32, n_max: usize, tuples: bool) -> Result<GowersNumber> {
    let mut nodes = 0;
    for n in 0..=n_max {
        let inst = GowersInstance { k, d, r, n, tuples };
        let outcome = finite_gowers_holds(&inst, SearchMode::Pruned, u64::MAX)?;
        nodes += outcome.nodes_visited;
        if outcome.holds {
            let mut next_checked = false;
            if n < n_max {
                let next = finite_gowers_holds(&GowersInstance { n: n + 1, ..inst }, SearchMode::Pruned, u64::MAX)?;
                nodes += next.nodes_visited;
                if !next.holds {
                    return Err(Error::Verification(format!(
                        "instance holds at n = {n} but not at n = {}",
                        n + 1
                    )));
                }
                next_checked = true;
            }
            return Ok(GowersNumber { least: Some(n), n_max, next_checked, nodes_visited: nodes });
        }
    }
    Ok(GowersNumber { least: None, n_max, next_checked: false, nodes_visited: nodes })
}

/// First length-`d` block sequence in `FIN_k([n])` (canonical order) whose
/// span is monochromatic under `eval(expr) mod r`, with its color.
pub fn find_mono(
    expr: &ColoringExpr,
    r: u32,
    k: u32,
    d: usize,
    n: usize,
) -> Result<Option<(BlockSeq, u32)>> {
    if k == 0 || d == 0 || r == 0 {
        return Err(Error::Invalid("k, d and r must be positive".into()));
    }
    let universe = fin_k_within(k, n);
    let colors: HashMap<FinFn, u32> = universe
        .iter()
        .map(|u| expr.color(u, r).map(|c| (u.clone(), c)))
        .collect::<Result<_>>()?;
    let span_color = |t: &[usize]| -> Option<(BlockSeq, u32)> {
        let b = BlockSeq::new(t.iter().map(|&i| universe[i].clone()).collect(), k).ok()?;
        let mut span = b.span().into_iter().map(|x| colors[&x]);
        let first = span.next()?;
        span.all(|c| c == first).then_some((b, first))
    };
    let hit = (0..universe.len()).into_par_iter().find_map_first(|first| {
        tuples::walk_from(
            &universe,
            d,
            &[first],
            &mut |t: &[usize]| span_color(t).is_some(),
            &mut |t: &[usize]| match span_color(t) {
                Some(found) => ControlFlow::Break(found),
                None => ControlFlow::Continue(()),
            },
        )
    });
    Ok(hit)
}
