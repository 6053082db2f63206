//! Bit-packed linear algebra over GF(2).
//!
//! Everything downstream (classical seeds, CSS parity checks, logical
//! operators, OSD elimination) is expressed with [`BitVec`] and [`BitMatrix`].

mod bitvec;
mod matrix;
mod poly;
mod span;

pub use bitvec::BitVec;
pub use matrix::{BitMatrix, Echelon};
pub use poly::CyclicPoly;
pub use span::SpanBasis;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("index {index:?} out of range for {shape:?} matrix")]
    IndexOutOfRange { index: (usize, usize), shape: (usize, usize) },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("dimension product overflows usize")]
    DimensionOverflow,
    #[error("invalid cyclic polynomial: {0}")]
    InvalidPoly(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Rank over GF(2) by elimination.
pub fn gf2_rank(m: &BitMatrix) -> usize {
    m.rank()
}

pub fn circulant_matrix(poly: &CyclicPoly) -> BitMatrix {
    BitMatrix::circulant(poly)
}
