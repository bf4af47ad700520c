//! Finite block sequences, the coding isomorphism `Θ_B` and the lift `T_B`.
//!
//! A code `f` over a block sequence `B = (b_0, b_1, …)` of `FIN_k` stands for
//! `Θ_B(f) = Σ_n T^{k - f(n)}(b_n)`. Every element of the span `⟨B⟩` has
//! exactly one code, so [`BlockSeq::decode`] inverts [`BlockSeq::encode`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fin::{fin_k_within, FinFn};
use crate::tuples;

/// A code over the positions of a block sequence.
pub type Code = FinFn;

/// A finite, `<`-increasing sequence of elements of `FIN_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBlockSeq")]
pub struct BlockSeq {
    k: u32,
    elems: Vec<FinFn>,
}

#[derive(Deserialize)]
struct RawBlockSeq {
    k: u32,
    elems: Vec<FinFn>,
}

impl TryFrom<RawBlockSeq> for BlockSeq {
    type Error = Error;

    fn try_from(raw: RawBlockSeq) -> Result<Self> {
        BlockSeq::new(raw.elems, raw.k)
    }
}

impl BlockSeq {
    /// `make_block_seq`: validates membership in `FIN_k` and strict increase.
    pub fn new(elems: Vec<FinFn>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if let Some(bad) = elems.iter().find(|e| !e.is_fin_k(k)) {
            return Err(Error::NotFinK { elem: bad.to_string(), k });
        }
        if let Some(pos) = elems.windows(2).position(|w| !w[0].precedes(&w[1])) {
            return Err(Error::NotIncreasing(pos + 1));
        }
        Ok(Self { k, elems })
    }

    /// The prefix `(e_0, …, e_{len-1})` of the standard block sequence `E_k`.
    pub fn standard(len: usize, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        Self::new(crate::fin::std_prefix(len, k), k)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn elems(&self) -> &[FinFn] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn into_elems(self) -> Vec<FinFn> {
        self.elems
    }

    fn check_code(&self, code: &Code) -> Result<()> {
        if !code.is_fin_k(self.k) {
            return Err(Error::NotFinK { elem: code.to_string(), k: self.k });
        }
        if let Some(index) = code.max_supp().filter(|&n| n >= self.len()) {
            return Err(Error::CodeOutOfRange { index, len: self.len() });
        }
        Ok(())
    }

    /// `Θ_B(f) = Σ_{n ∈ supp f} T^{k - f(n)}(b_n)`.
    pub fn encode(&self, code: &Code) -> Result<FinFn> {
        self.check_code(code)?;
        Ok(self.encode_unchecked(code))
    }

    fn encode_unchecked(&self, code: &Code) -> FinFn {
        let mut entries = Vec::new();
        for &(n, v) in code.entries() {
            let shift = self.k - v;
            entries.extend(
                self.elems[n]
                    .entries()
                    .iter()
                    .filter(|&&(_, w)| w > shift)
                    .map(|&(i, w)| (i, w - shift)),
            );
        }
        FinFn::from_sorted_unchecked(entries)
    }

    /// The unique code of `p` over this sequence.
    ///
    /// Each generator is matched independently: the part of `p` lying on
    /// `supp(b_n)` must be a tetris image of `b_n` (or empty), and every index
    /// of `supp(p)` must be covered by some generator.
    pub fn decode(&self, p: &FinFn) -> Result<Code> {
        let not_in_span = || Error::NotInSpan(p.to_string());
        let mut code = Vec::new();
        let mut covered = 0usize;
        for (n, b) in self.elems.iter().enumerate() {
            let (lo, hi) = match (b.min_supp(), b.max_supp()) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => unreachable!("block sequence elements are nonnull"),
            };
            let part = p.restrict(lo..hi + 1);
            if part.is_null() {
                continue;
            }
            let top = part.max_value();
            if top > self.k {
                return Err(not_in_span());
            }
            if b.tetris_iter(self.k - top) != part {
                return Err(not_in_span());
            }
            covered += part.support_len();
            code.push((n, top));
        }
        if covered != p.support_len() {
            return Err(not_in_span());
        }
        let code = FinFn::from_sorted_unchecked(code);
        if !code.is_fin_k(self.k) {
            return Err(not_in_span());
        }
        Ok(code)
    }

    pub fn contains(&self, p: &FinFn) -> bool {
        self.decode(p).is_ok()
    }

    /// All codes over this sequence in canonical order.
    pub fn codes(&self) -> Vec<Code> {
        fin_k_within(self.k, self.len())
    }

    /// `⟨B⟩`, listed in canonical code order.
    pub fn span(&self) -> Vec<FinFn> {
        self.codes().iter().map(|c| self.encode_unchecked(c)).collect()
    }

    /// `|⟨B⟩| = (k+1)^m - k^m`.
    pub fn span_len(&self) -> u128 {
        let m = self.len() as u32;
        (u128::from(self.k) + 1).pow(m) - u128::from(self.k).pow(m)
    }

    /// `⟨B⟩^{(d)}`: all `<`-increasing `d`-tuples from the span.
    pub fn span_tuples(&self, d: usize) -> Result<Vec<Vec<FinFn>>> {
        if d == 0 {
            return Err(Error::Invalid("tuple length must be positive".into()));
        }
        let span = self.span();
        Ok(tuples::all(&span, d)
            .into_iter()
            .map(|t| t.into_iter().map(|i| span[i].clone()).collect())
            .collect())
    }

    /// `C ≼ B`: every element of `C` lies in `⟨B⟩`.
    pub fn is_subspace_of(&self, other: &BlockSeq) -> bool {
        if self.is_empty() {
            return true;
        }
        self.k == other.k && self.elems.iter().all(|c| other.contains(c))
    }

    /// `supp_B(p)`: the generators used by the code of `p`.
    pub fn rel_support(&self, p: &FinFn) -> Result<Vec<FinFn>> {
        let code = self.decode(p)?;
        Ok(code.support().map(|n| self.elems[n].clone()).collect())
    }

    /// `TB`, a block sequence of `FIN_{k-1}`.
    pub fn tetris_image(&self) -> Result<BlockSeq> {
        if self.k < 2 {
            return Err(Error::AmbientTooSmall(self.k));
        }
        Ok(BlockSeq {
            k: self.k - 1,
            elems: self.elems.iter().map(FinFn::tetris).collect(),
        })
    }

    /// `T^n B`.
    pub fn tetris_image_iter(&self, n: u32) -> Result<BlockSeq> {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.tetris_image()?;
        }
        Ok(out)
    }

    /// The lift `T_B : ⟨TB⟩ → ⟨B⟩`.
    ///
    /// With `f` the code of `p` over `TB`, returns `Σ_n T^{(k-1) - f(n)}(b_n)`:
    /// the only map that is a right inverse of `T` and carries `TB`-supports
    /// to `B`-supports.
    pub fn lift(&self, p: &FinFn) -> Result<FinFn> {
        let image = self.tetris_image()?;
        let code = image.decode(p)?;
        let mut out = FinFn::null();
        for &(n, v) in code.entries() {
            let term = self.elems[n].tetris_iter(image.k - v);
            out = out.checked_add(&term).expect("generators are disjoint");
        }
        Ok(out)
    }

    /// `T_B^n = T_B ∘ T_{TB} ∘ … ∘ T_{T^{n-1}B}`, defined on `⟨T^n B⟩`.
    pub fn lift_iter(&self, p: &FinFn, n: u32) -> Result<FinFn> {
        let mut levels = Vec::with_capacity(n as usize);
        let mut cur = self.clone();
        for _ in 0..n {
            let next = cur.tetris_image()?;
            levels.push(cur);
            cur = next;
        }
        let mut out = p.clone();
        for level in levels.iter().rev() {
            out = level.lift(&out)?;
        }
        Ok(out)
    }

    /// `T_B C` for `C ≼ TB`: the elementwise lift, a block subsequence of `B`.
    pub fn lift_seq(&self, c: &BlockSeq) -> Result<BlockSeq> {
        if c.is_empty() {
            return Ok(BlockSeq { k: self.k, elems: Vec::new() });
        }
        if c.k + 1 != self.k {
            return Err(Error::AmbientMismatch { expected: self.k.saturating_sub(1), found: c.k });
        }
        let elems = c
            .elems
            .iter()
            .map(|x| self.lift(x))
            .collect::<Result<Vec<_>>>()?;
        BlockSeq::new(elems, self.k)
    }

    /// Sub-block-sequence built from the given span elements, validated.
    pub fn subsequence(&self, elems: Vec<FinFn>) -> Result<BlockSeq> {
        let c = BlockSeq::new(elems, self.k)?;
        if let Some(bad) = c.elems.iter().find(|x| !self.contains(x)) {
            return Err(Error::NotInSpan(bad.to_string()));
        }
        Ok(c)
    }
}
