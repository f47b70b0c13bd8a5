//! Exact Hilbert-Kunz functions and rational Hilbert-Kunz series over prime
//! fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`poly`] and [`colength`]: sparse polynomials over `F_p` and the
//!   dimension of `F_p[x]/(x_1^q, .., x_s^q, f)`.
//! - [`gamma`]: the representation ring of nilpotent `F_p[T]`-modules in the
//!   `lambda` basis, with its dilation endomorphism `theta`, the Frobenius
//!   restriction `psi` and the functional `alpha`. [`oracle`] multiplies the
//!   same elements by brute force on Jordan blocks.
//! - [`grid`]: functions on `p`-adic rationals of `[0, 1]`, sampled exactly.
//! - [`coherent`]: coherent sequences, the shift, reflection and the block
//!   decomposition of a shifted sequence.
//! - [`engine`]: shift-rule discovery, the pairing linear system over
//!   `Q(z)`, series assembly and recurrence detection.
//! - [`zdh`]: the analyzer for `z^D - h(x, y)`.

pub mod coherent;
pub mod colength;
pub mod engine;
pub mod gamma;
pub mod grid;
pub mod oracle;
pub mod error;
pub mod poly;
pub mod prime;
pub mod qpoly;
pub mod rational;
pub mod ratfunc;
pub mod zdh;

pub use gamma::GammaVec;
pub use grid::GridFn;
pub use coherent::CohSeq;
pub use engine::{RuleSystem, SlotRule};
pub use colength::{colength, colength_table, direct_en, ColengthTable, DenseLimit};
pub use error::{Error, Result};
pub use poly::Poly;
pub use prime::Prime;
pub use ratfunc::RatFunc;
pub use rational::Q;
