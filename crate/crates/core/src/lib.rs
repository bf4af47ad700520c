//! Exact combinatorics for Gowers' `FIN_k` partial semigroups.
//!
//! - [`fin`]: finitely supported functions, the ordering `<`, sums, tetris, `Comb_k`.
//! - [`block`]: block sequences, codes, spans `⟨B⟩` and the lift `T_B`.
//! - [`dense`]: family oracles, bounded density checks, the pair-splitting
//!   witness and closure search.
//! - [`theorem`]: derivation traces and finite Gowers searches.
//! - [`dsl`]: the coloring expression language used by the CLI.

pub mod block;
pub mod cli;
pub mod dense;
pub mod dsl;
pub mod error;
pub mod fin;
pub mod selftest;
pub mod theorem;
pub mod tuples;

pub use block::{BlockSeq, Code};
pub use error::{Error, Result};
pub use fin::{comb, std_basis, CombPair, FinFn};
