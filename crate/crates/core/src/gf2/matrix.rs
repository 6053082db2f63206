use std::fmt;

use super::bitvec::{words_for, BitVec};
use super::poly::CyclicPoly;
use super::Gf2Error;

/// Dense binary matrix stored row-major, each row packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form together with the pivot column of every nonzero row.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: BitMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[BitVec], cols: usize) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::DimensionMismatch {
                    left: (1, r.len()),
                    right: (1, cols),
                });
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Builds a matrix from 0/1 entries, mostly useful in tests.
    pub fn from_dense(entries: &[Vec<u8>]) -> Self {
        let cols = entries.first().map_or(0, Vec::len);
        let mut m = Self::zeros(entries.len(), cols);
        for (i, r) in entries.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &e) in r.iter().enumerate() {
                m.set(i, j, e & 1 == 1);
            }
        }
        m
    }

    /// The n×n matrix with entry (i, j) = 1 iff (j - i mod n) is in the support.
    pub fn circulant(poly: &CyclicPoly) -> Self {
        let n = poly.modulus();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for &e in poly.support() {
                m.set(i, (i + e) % n, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Result<bool, Gf2Error> {
        if i >= self.rows || j >= self.cols {
            return Err(Gf2Error::IndexOutOfRange {
                index: (i, j),
                shape: (self.rows, self.cols),
            });
        }
        Ok(self.bit(i, j))
    }

    /// Unchecked-by-`Result` accessor; panics on out-of-range indices.
    #[inline]
    pub fn bit(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        (self.data[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        let w = &mut self.data[i * self.stride + j / 64];
        let mask = 1u64 << (j % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn column(&self, j: usize) -> BitVec {
        let mut v = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            if self.bit(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// row[dst] ^= row[src]
    #[inline]
    pub(crate) fn xor_rows(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        let (d, sr) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..dst * s + s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..src * s + s])
        };
        for (a, b) in d.iter_mut().zip(sr) {
            *a ^= *b;
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (wi, &w) in self.row_words(i).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let j = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn matmul(&self, other: &BitMatrix) -> Result<Self, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (wi, &w) in self.row_words(i).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let k = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    let src = other.row_words(k);
                    let dst = &mut out.data[i * out.stride..(i + 1) * out.stride];
                    for (a, b) in dst.iter_mut().zip(src) {
                        *a ^= *b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (v.len(), 1),
            });
        }
        let mut out = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            let ones: u32 = self.row_words(i).iter().zip(v.words()).map(|(a, b)| (a & b).count_ones()).sum();
            if ones % 2 == 1 {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BitMatrix) -> Result<Self, Gf2Error> {
        let rows = self.rows.checked_mul(other.rows).ok_or(Gf2Error::DimensionOverflow)?;
        let cols = self.cols.checked_mul(other.cols).ok_or(Gf2Error::DimensionOverflow)?;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.bit(i, j) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        if other.bit(k, l) {
                            out.set(i * other.rows + k, j * other.cols + l, true);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &BitMatrix) -> Result<Self, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.bit(i, j) {
                    out.set(i, j, true);
                }
            }
            for j in 0..other.cols {
                if other.bit(i, j) {
                    out.set(i, self.cols + j, true);
                }
            }
        }
        Ok(out)
    }

    /// `[self ; other]`
    pub fn vstack(&self, other: &BitMatrix) -> Result<Self, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// Gauss-Jordan elimination. Columns are scanned left to right and the
    /// first row (from the top of the unreduced block) with a one becomes the pivot.
    pub fn rref(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let (wi, mask) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (r..m.rows).find(|&i| m.data[i * m.stride + wi] & mask != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in 0..m.rows {
                if i != r && m.data[i * m.stride + wi] & mask != 0 {
                    m.xor_rows(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        // forward elimination only
        let mut m = self.clone();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let (wi, mask) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (r..m.rows).find(|&i| m.data[i * m.stride + wi] & mask != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in r + 1..m.rows {
                if m.data[i * m.stride + wi] & mask != 0 {
                    m.xor_rows(i, r);
                }
            }
            r += 1;
        }
        r
    }

    /// Basis of the right null space, one vector per free column in increasing order.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let ech = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.rank());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (row, &p) in ech.pivots.iter().enumerate() {
                if ech.matrix.bit(row, free) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(n)).ok()?;
        let ech = aug.rref();
        if ech.pivots.len() < n || ech.pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if ech.matrix.bit(i, n + j) {
                    inv.set(i, j, true);
                }
            }
        }
        Some(inv)
    }

    /// Plain-text dump: "rows cols" then one 0/1 string per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.bit(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Gf2Error::Parse("missing header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| Gf2Error::Parse(format!("bad header {header:?}: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(Gf2Error::Parse(format!("bad header {header:?}")));
        };
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            let line = lines.next().ok_or_else(|| Gf2Error::Parse(format!("missing row {i}")))?.trim();
            if line.len() != cols {
                return Err(Gf2Error::Parse(format!("row {i} has length {}", line.len())));
            }
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(i, j, true),
                    other => return Err(Gf2Error::Parse(format!("unexpected {other:?}"))),
                }
            }
        }
        if lines.next().is_some() {
            return Err(Gf2Error::Parse("trailing rows".into()));
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}\n{}", self.rows, self.cols, self.to_text())
    }
}
