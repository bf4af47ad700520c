//! Finitely supported functions `ω → ω` and the partial semigroup
//! `(FIN_k, +, <, T)`.
//!
//! A [`FinFn`] stores only its nonzero entries, sorted by index, so two values
//! are structurally equal exactly when they are equal as functions. A `FinFn`
//! does not carry a `k`: membership in `FIN_k` is the predicate
//! [`FinFn::is_fin_k`], because intermediate sums of tetris images routinely
//! leave any fixed level.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finitely supported function from the naturals to the naturals.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FinFn {
    entries: Vec<(usize, u32)>,
}

impl FinFn {
    /// The null function `O`.
    pub fn null() -> Self {
        Self::default()
    }

    /// Builds a function from `(index, value)` pairs with no bound on the values.
    ///
    /// Indices must be distinct and values positive.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u32)>,
    {
        let mut entries: Vec<(usize, u32)> = pairs.into_iter().collect();
        entries.sort_unstable_by_key(|&(n, _)| n);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateIndex(w[0].0));
            }
        }
        if let Some(&(index, _)) = entries.iter().find(|&&(_, v)| v == 0) {
            return Err(Error::ZeroValue(index));
        }
        Ok(Self { entries })
    }

    /// `make_fin`: builds a function whose values all lie in `1..=k`.
    ///
    /// Membership in `FIN_k` (attaining `k`) is not required here.
    pub fn new<I>(pairs: I, k: u32) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u32)>,
    {
        let pairs: Vec<(usize, u32)> = pairs.into_iter().collect();
        if let Some(&(index, value)) = pairs.iter().find(|&&(_, v)| v == 0 || v > k) {
            return Err(Error::ValueOutOfRange { index, value, k });
        }
        Self::from_pairs(pairs)
    }

    /// Builds from entries already known to be sorted, distinct and nonzero.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(usize, u32)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v > 0));
        Self { entries }
    }

    /// The stored `(index, value)` pairs in increasing index order.
    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn get(&self, n: usize) -> u32 {
        match self.entries.binary_search_by_key(&n, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0,
        }
    }

    pub fn is_null(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn min_supp(&self) -> Option<usize> {
        self.entries.first().map(|&(n, _)| n)
    }

    pub fn max_supp(&self) -> Option<usize> {
        self.entries.last().map(|&(n, _)| n)
    }

    /// Largest value attained; `0` for the null function.
    pub fn max_value(&self) -> u32 {
        self.entries.iter().map(|&(_, v)| v).max().unwrap_or(0)
    }

    /// Sum of all values.
    pub fn weight(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| u64::from(v)).sum()
    }

    /// `f ∈ FIN_k`: the maximum value is exactly `k` (for `k = 0`, `f = O`).
    pub fn is_fin_k(&self, k: u32) -> bool {
        self.max_value() == k
    }

    /// Block ordering `p < q`: `max supp(p) < min supp(q)`.
    pub fn less_than(&self, other: &FinFn) -> Result<bool> {
        match (self.max_supp(), other.min_supp()) {
            (Some(a), Some(b)) => Ok(a < b),
            _ => Err(Error::EmptySupport),
        }
    }

    /// Infallible form of [`less_than`](Self::less_than); false when either side is `O`.
    pub fn precedes(&self, other: &FinFn) -> bool {
        self.less_than(other).unwrap_or(false)
    }

    /// Pointwise sum of two functions with disjoint supports.
    pub fn checked_add(&self, other: &FinFn) -> Result<FinFn> {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut x, mut y) = (0, 0);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                Ordering::Less => {
                    out.push(a[x]);
                    x += 1;
                }
                Ordering::Greater => {
                    out.push(b[y]);
                    y += 1;
                }
                Ordering::Equal => return Err(Error::OverlappingSupport(a[x].0)),
            }
        }
        out.extend_from_slice(&a[x..]);
        out.extend_from_slice(&b[y..]);
        Ok(Self { entries: out })
    }

    /// The tetris operation `T(p)(n) = max(p(n) - 1, 0)`.
    pub fn tetris(&self) -> FinFn {
        self.tetris_iter(1)
    }

    /// `T^n`, with `T^0 = id`.
    pub fn tetris_iter(&self, n: u32) -> FinFn {
        if n == 0 {
            return self.clone();
        }
        let entries = self
            .entries
            .iter()
            .filter(|&&(_, v)| v > n)
            .map(|&(i, v)| (i, v - n))
            .collect();
        Self { entries }
    }

    /// Restriction to the given index range.
    pub fn restrict(&self, range: std::ops::Range<usize>) -> FinFn {
        let entries = self
            .entries
            .iter()
            .copied()
            .filter(|(n, _)| range.contains(n))
            .collect();
        Self { entries }
    }
}

impl Ord for FinFn {
    /// Canonical enumeration order: by max support index (with `O` first), then
    /// lexicographically on the `(index, value)` pairs.
    fn cmp(&self, other: &Self) -> Ordering {
        self.max_supp()
            .cmp(&other.max_supp())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for FinFn {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FinFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (pos, (n, v)) in self.entries.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "[{n},{v}]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for FinFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, (n, v)) in self.entries.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}:{v}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for FinFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[u64; 2]> = self
            .entries
            .iter()
            .map(|&(n, v)| [n as u64, u64::from(v)])
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FinFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(usize, u32)>::deserialize(deserializer)?;
        FinFn::from_pairs(pairs).map_err(D::Error::custom)
    }
}

impl FromStr for FinFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Literal(format!("{s:?}: {e}")))
    }
}

/// An element `(i, j)` of `Comb_k`: `i, j < k` and `min(i, j) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CombPair {
    pub i: u32,
    pub j: u32,
}

impl CombPair {
    pub fn new(i: u32, j: u32, k: u32) -> Result<Self> {
        if i.min(j) != 0 || i >= k || j >= k {
            return Err(Error::NotComb { i, j, k });
        }
        Ok(Self { i, j })
    }

    /// `T^i p + T^j q`.
    pub fn combine(&self, p: &FinFn, q: &FinFn) -> Result<FinFn> {
        p.tetris_iter(self.i).checked_add(&q.tetris_iter(self.j))
    }

    pub fn check(&self, k: u32) -> Result<()> {
        Self::new(self.i, self.j, k).map(|_| ())
    }
}

impl fmt::Display for CombPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// `Comb_k` in lexicographic order; it has `2k - 1` elements.
pub fn comb(k: u32) -> Result<Vec<CombPair>> {
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let mut out: Vec<CombPair> = (0..k).map(|j| CombPair { i: 0, j }).collect();
    out.extend((1..k).map(|i| CombPair { i, j: 0 }));
    Ok(out)
}

/// The standard generator `e_n = {n: k}`. Panics if `k` is zero.
pub fn std_basis(n: usize, k: u32) -> FinFn {
    assert!(k > 0, "FIN_0 has no generators");
    FinFn::from_sorted_unchecked(vec![(n, k)])
}

/// The first `len` standard generators `e_0, …, e_{len-1}` of `FIN_k`.
pub fn std_prefix(len: usize, k: u32) -> Vec<FinFn> {
    (0..len).map(|n| std_basis(n, k)).collect()
}

/// All of `FIN_k` supported in `[0, n)`, in canonical order.
///
/// There are `(k+1)^n - k^n` of them.
pub fn fin_k_within(k: u32, n: usize) -> Vec<FinFn> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(FinFn::null());
        return out;
    }
    let mut values = Vec::with_capacity(n);
    for top in 0..n {
        let mut group = Vec::new();
        values.clear();
        values.resize(top, 0u32);
        loop {
            for last in 1..=k {
                let hits_k = last == k || values.contains(&k);
                if hits_k {
                    let mut entries: Vec<(usize, u32)> = values
                        .iter()
                        .enumerate()
                        .filter(|&(_, &v)| v > 0)
                        .map(|(i, &v)| (i, v))
                        .collect();
                    entries.push((top, last));
                    group.push(FinFn::from_sorted_unchecked(entries));
                }
            }
            // odometer over values[0..top] in 0..=k
            let mut pos = 0;
            loop {
                if pos == top {
                    break;
                }
                if values[pos] < k {
                    values[pos] += 1;
                    break;
                }
                values[pos] = 0;
                pos += 1;
            }
            if pos == top {
                break;
            }
        }
        group.sort_unstable();
        out.extend(group);
    }
    out
}
