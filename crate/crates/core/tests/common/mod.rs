//! Brute-force reference model: plain maps, definitions applied literally.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fink::FinFn;

pub type Raw = BTreeMap<usize, u32>;

pub fn raw(f: &FinFn) -> Raw {
    f.entries().iter().copied().collect()
}

pub fn fin(r: &Raw) -> FinFn {
    FinFn::from_pairs(r.iter().map(|(&n, &v)| (n, v))).unwrap()
}

pub fn r(pairs: &[(usize, u32)]) -> Raw {
    pairs.iter().copied().collect()
}

pub fn tetris(p: &Raw, times: u32) -> Raw {
    p.iter()
        .filter(|&(_, &v)| v > times)
        .map(|(&n, &v)| (n, v - times))
        .collect()
}

pub fn add(p: &Raw, q: &Raw) -> Raw {
    let mut out = p.clone();
    for (&n, &v) in q {
        assert!(out.insert(n, v).is_none(), "overlapping supports");
    }
    out
}

pub fn less(p: &Raw, q: &Raw) -> bool {
    match (p.keys().next_back(), q.keys().next()) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    }
}

pub fn is_fin_k(p: &Raw, k: u32) -> bool {
    p.values().all(|&v| (1..=k).contains(&v)) && p.values().any(|&v| v == k)
}

/// Canonical order: max support index, then the entry list lexicographically.
pub fn canonical_key(p: &Raw) -> (Option<usize>, Vec<(usize, u32)>) {
    (p.keys().next_back().copied(), p.iter().map(|(&n, &v)| (n, v)).collect())
}

/// Every function `{0..len} → {0..k}` attaining `k`, as a value vector.
pub fn all_codes(len: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    loop {
        if cur.contains(&k) {
            out.push(cur.clone());
        }
        let mut pos = 0;
        loop {
            if pos == len {
                return out;
            }
            cur[pos] += 1;
            if cur[pos] <= k {
                break;
            }
            cur[pos] = 0;
            pos += 1;
        }
    }
}

pub fn encode(gens: &[Raw], k: u32, code: &[u32]) -> Raw {
    code.iter()
        .zip(gens)
        .filter(|&(&v, _)| v > 0)
        .fold(Raw::new(), |acc, (&v, g)| add(&acc, &tetris(g, k - v)))
}

pub fn span(gens: &[Raw], k: u32) -> BTreeSet<Raw> {
    all_codes(gens.len(), k).iter().map(|c| encode(gens, k, c)).collect()
}

/// All codes reaching `p` (should be at most one).
pub fn decode_all(gens: &[Raw], k: u32, p: &Raw) -> Vec<Vec<u32>> {
    all_codes(gens.len(), k).into_iter().filter(|c| &encode(gens, k, c) == p).collect()
}

/// `FIN_k` functions supported in `[0, n)`.
pub fn fin_k_within(k: u32, n: usize) -> Vec<Raw> {
    let mut all: Vec<Raw> = all_codes(n, k)
        .into_iter()
        .map(|c| c.iter().enumerate().filter(|&(_, &v)| v > 0).map(|(i, &v)| (i, v)).collect())
        .collect();
    all.sort_by_key(canonical_key);
    all
}

/// The lift characterized by its two defining properties: the element `x`
/// of `⟨B⟩` with `Tx = p` whose `B`-support is the `TB`-support of `p`.
pub fn lift_by_characterization(gens: &[Raw], k: u32, p: &Raw) -> Option<Raw> {
    let tgens: Vec<Raw> = gens.iter().map(|g| tetris(g, 1)).collect();
    let codes = decode_all(&tgens, k - 1, p);
    let [code] = codes.as_slice() else { return None };
    let want: Vec<bool> = code.iter().map(|&v| v > 0).collect();
    let mut hits = all_codes(gens.len(), k).into_iter().filter(|c| {
        c.iter().map(|&v| v > 0).collect::<Vec<_>>() == want && tetris(&encode(gens, k, c), 1) == *p
    });
    let first = hits.next()?;
    assert!(hits.next().is_none(), "lift is not unique");
    Some(encode(gens, k, &first))
}

/// Increasing `d`-tuples of `items` (as index lists, lexicographic).
pub fn increasing_tuples(items: &[Raw], d: usize) -> Vec<Vec<usize>> {
    fn go(items: &[Raw], d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in 0..items.len() {
            if let Some(&last) = cur.last() {
                if !less(&items[last], &items[i]) {
                    continue;
                }
            }
            cur.push(i);
            go(items, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, d, &mut Vec::new(), &mut out);
    out
}

/// Lexicographically first bad `r`-coloring of `FIN_k([n])` for length-`d`
/// block sequences, by enumerating every coloring.
pub fn first_bad_coloring(k: u32, d: usize, r: u32, n: usize) -> Option<Vec<u32>> {
    let universe = fin_k_within(k, n);
    let index: BTreeMap<&Raw, usize> = universe.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let witnesses: Vec<Vec<usize>> = increasing_tuples(&universe, d)
        .into_iter()
        .map(|t| {
            let gens: Vec<Raw> = t.iter().map(|&i| universe[i].clone()).collect();
            span(&gens, k).iter().map(|x| index[x]).collect()
        })
        .collect();
    let m = universe.len();
    let total = (r as u64).pow(m as u32);
    let mut colors = vec![0u32; m];
    for idx in 0..total {
        let mut rest = idx;
        for slot in colors.iter_mut().rev() {
            *slot = (rest % r as u64) as u32;
            rest /= r as u64;
        }
        if !witnesses.iter().any(|w| w.iter().all(|&o| colors[o] == colors[w[0]])) {
            return Some(colors);
        }
    }
    None
}

/// True when no length-`d` block sequence in `FIN_k([n])` has a
/// monochromatic span under `color`.
pub fn is_bad(k: u32, d: usize, n: usize, color: &BTreeMap<Raw, u32>) -> bool {
    let universe = fin_k_within(k, n);
    increasing_tuples(&universe, d).into_iter().all(|t| {
        let gens: Vec<Raw> = t.iter().map(|&i| universe[i].clone()).collect();
        let colors: BTreeSet<u32> = span(&gens, k).iter().map(|x| color[x]).collect();
        colors.len() > 1
    })
}
