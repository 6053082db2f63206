//! Cyclic hypergraph product (CxC) codes and their C2 / CxR subfamilies.
//!
//! For seeds `A = A(x)` mod `a` and `B = B(y)` mod `b` the parity checks are
//!
//! ```text
//! H_X = [ A ⊗ I_b | I_a ⊗ B   ]
//! H_Z = [ I_a ⊗ Bᵀ | Aᵀ ⊗ I_b ]
//! ```
//!
//! Qubit `(i, j, k)` is column `a·b·i + b·j + k`; check `(s, t)` is row `b·s + t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclic::{classical_params, CyclicError};
use crate::gf2::{BitMatrix, BitVec, CyclicPoly, Gf2Error, SpanBasis};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("H_X · H_Zᵀ != 0")]
    CssViolation,
    #[error("code encodes no logical qubits")]
    NoLogicals,
    #[error("logical pairing matrix is singular")]
    SingularPairing,
    #[error(transparent)]
    Cyclic(#[from] CyclicError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    CxC,
    C2,
    CxR,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::CxC => "CxC",
            Family::C2 => "C2",
            Family::CxR => "CxR",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cxc" => Ok(Family::CxC),
            "c2" => Ok(Family::C2),
            "cxr" => Ok(Family::CxR),
            other => Err(format!("unknown family {other:?} (expected CxC, C2 or CxR)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CxcCode {
    pub family: Family,
    pub poly_a: CyclicPoly,
    pub poly_b: CyclicPoly,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
}

impl CxcCode {
    pub fn a(&self) -> usize {
        self.poly_a.modulus()
    }

    pub fn b(&self) -> usize {
        self.poly_b.modulus()
    }

    /// Number of data qubits, `2ab`.
    pub fn n(&self) -> usize {
        2 * self.a() * self.b()
    }

    /// Check weight `w(A) + w(B)`.
    pub fn omega(&self) -> usize {
        self.poly_a.weight() + self.poly_b.weight()
    }
}

pub fn build_cxc(poly_a: &CyclicPoly, poly_b: &CyclicPoly) -> Result<CxcCode, CodeError> {
    build_with_family(Family::CxC, poly_a, poly_b)
}

/// Product of a cyclic code with itself.
pub fn build_c2(poly: &CyclicPoly) -> Result<CxcCode, CodeError> {
    build_with_family(Family::C2, poly, poly)
}

/// Product of a cyclic code with the length-`d_c` repetition code, which sits
/// in the second factor.
pub fn build_cxr(poly: &CyclicPoly) -> Result<CxcCode, CodeError> {
    let seed = classical_params(poly)?;
    let rep = CyclicPoly::repetition(seed.d)?;
    build_with_family(Family::CxR, poly, &rep)
}

fn build_with_family(family: Family, poly_a: &CyclicPoly, poly_b: &CyclicPoly) -> Result<CxcCode, CodeError> {
    let (a, b) = (poly_a.modulus(), poly_b.modulus());
    let ma = BitMatrix::circulant(poly_a);
    let mb = BitMatrix::circulant(poly_b);
    let (ia, ib) = (BitMatrix::identity(a), BitMatrix::identity(b));
    let hx = ma.kron(&ib)?.hstack(&ia.kron(&mb)?)?;
    let hz = ia.kron(&mb.transpose())?.hstack(&ma.transpose().kron(&ib)?)?;
    if !hx.matmul(&hz.transpose())?.is_zero() {
        return Err(CodeError::CssViolation);
    }
    Ok(CxcCode {
        family,
        poly_a: poly_a.clone(),
        poly_b: poly_b.clone(),
        hx,
        hz,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    /// `min(d_A, d_B)`; `None` when either seed has a trivial kernel.
    pub d: Option<usize>,
    pub r_a: usize,
    pub r_b: usize,
    pub stabilizer_rank: usize,
    pub omega: usize,
}

impl CodeParams {
    pub fn label(&self) -> String {
        match self.d {
            Some(d) => format!("[[{},{},{}]]", self.n, self.k, d),
            None => format!("[[{},{},-]]", self.n, self.k),
        }
    }
}

/// Parameters from the seed ranks and seed distances (no quantum distance search).
pub fn code_params(code: &CxcCode) -> Result<CodeParams, CodeError> {
    let (a, b) = (code.a(), code.b());
    let r_a = BitMatrix::circulant(&code.poly_a).rank();
    let r_b = BitMatrix::circulant(&code.poly_b).rank();
    let k = 2 * (a - r_a) * (b - r_b);
    let d = if r_a == a || r_b == b {
        None
    } else {
        let da = classical_params(&code.poly_a)?.d;
        let db = if code.poly_b == code.poly_a {
            da
        } else {
            classical_params(&code.poly_b)?.d
        };
        Some(da.min(db))
    };
    Ok(CodeParams {
        n: 2 * a * b,
        k,
        d,
        r_a,
        r_b,
        stabilizer_rank: a * r_b + b * r_a - r_a * r_b,
        omega: code.omega(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub rank_x: usize,
    pub rank_z: usize,
    /// `a·r_b + b·r_a − r_a·r_b`
    pub predicted_rank: usize,
    pub x_row_weights: (usize, usize),
    pub z_row_weights: (usize, usize),
    pub omega: usize,
}

impl BalanceReport {
    /// Equal ranks matching the prediction and uniform row weight ω.
    pub fn is_balanced(&self) -> bool {
        self.rank_x == self.rank_z
            && self.rank_x == self.predicted_rank
            && self.x_row_weights == (self.omega, self.omega)
            && self.z_row_weights == (self.omega, self.omega)
    }
}

pub fn balance_report(code: &CxcCode) -> BalanceReport {
    let (a, b) = (code.a(), code.b());
    let r_a = BitMatrix::circulant(&code.poly_a).rank();
    let r_b = BitMatrix::circulant(&code.poly_b).rank();
    let minmax = |m: &BitMatrix| {
        (0..m.rows())
            .map(|i| m.row_weight(i))
            .fold((usize::MAX, 0), |(lo, hi), w| (lo.min(w), hi.max(w)))
    };
    BalanceReport {
        rank_x: code.hx.rank(),
        rank_z: code.hz.rank(),
        predicted_rank: a * r_b + b * r_a - r_a * r_b,
        x_row_weights: minmax(&code.hx),
        z_row_weights: minmax(&code.hz),
        omega: code.omega(),
    }
}

/// Paired logical operators: `x[i] · z[j] = δ_ij`.
#[derive(Clone, Debug)]
pub struct LogicalBasis {
    /// X-type logicals: in `ker H_Z`, outside `rowspace H_X`.
    pub x: Vec<BitVec>,
    /// Z-type logicals: in `ker H_X`, outside `rowspace H_Z`.
    pub z: Vec<BitVec>,
    pub pairing: BitMatrix,
}

/// Deterministic logical basis built from product-form candidates.
///
/// Z-type candidates are `(α ⊗ e_j | 0)` with `α ∈ ker A` and `(0 | e_i ⊗ δ)`
/// with `δ ∈ ker B`; X-type candidates use `ker Bᵀ` and `ker Aᵀ` the same way.
/// Candidates are scanned in a fixed order and kept when independent modulo the
/// stabilizers. The X side is then rotated so the pairing becomes the identity,
/// leaving the Z logicals in product form.
pub fn logical_basis(code: &CxcCode) -> Result<LogicalBasis, CodeError> {
    let (a, b) = (code.a(), code.b());
    let n = code.n();
    let ma = BitMatrix::circulant(&code.poly_a);
    let mb = BitMatrix::circulant(&code.poly_b);
    let k = n - code.hx.rank() - code.hz.rank();
    if k == 0 {
        return Err(CodeError::NoLogicals);
    }

    let block0 = |j: usize, kk: usize| b * j + kk;
    let block1 = |j: usize, kk: usize| a * b + b * j + kk;

    let mut z_cands = Vec::new();
    for alpha in ma.kernel_basis() {
        for j in 0..b {
            z_cands.push(BitVec::from_support(n, alpha.ones().map(|x| block0(x, j))));
        }
    }
    for delta in mb.kernel_basis() {
        for i in 0..a {
            z_cands.push(BitVec::from_support(n, delta.ones().map(|y| block1(i, y))));
        }
    }
    let mut x_cands = Vec::new();
    for beta in mb.transpose().kernel_basis() {
        for j in 0..a {
            x_cands.push(BitVec::from_support(n, beta.ones().map(|y| block0(j, y))));
        }
    }
    for alpha in ma.transpose().kernel_basis() {
        for kk in 0..b {
            x_cands.push(BitVec::from_support(n, alpha.ones().map(|x| block1(x, kk))));
        }
    }

    let z = select_independent(&code.hz, &z_cands, k);
    let x = select_independent(&code.hx, &x_cands, k);
    if z.len() != k || x.len() != k {
        return Err(CodeError::SingularPairing);
    }

    let lx = BitMatrix::from_rows(&x, n)?;
    let lz = BitMatrix::from_rows(&z, n)?;
    let pairing = lx.matmul(&lz.transpose())?;
    let inv = pairing.inverse().ok_or(CodeError::SingularPairing)?;
    let lx = inv.matmul(&lx)?;
    let x: Vec<BitVec> = (0..k).map(|i| lx.row(i)).collect();
    let pairing = lx.matmul(&lz.transpose())?;
    Ok(LogicalBasis { x, z, pairing })
}

fn select_independent(stabilizers: &BitMatrix, candidates: &[BitVec], k: usize) -> Vec<BitVec> {
    let mut span = SpanBasis::new(stabilizers.cols());
    for i in 0..stabilizers.rows() {
        span.insert(&stabilizers.row(i));
    }
    let mut chosen = Vec::with_capacity(k);
    for c in candidates {
        if chosen.len() == k {
            break;
        }
        if span.insert(c) {
            chosen.push(c.clone());
        }
    }
    chosen
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceBound {
    Exact(usize),
    /// No logical of weight below this value exists.
    AtLeast(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceDistance {
    pub x: DistanceBound,
    pub z: DistanceBound,
}

impl BruteForceDistance {
    pub fn overall(&self) -> DistanceBound {
        use DistanceBound::*;
        match (self.x, self.z) {
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a < b {
                    Exact(a)
                } else {
                    AtLeast(b)
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }
}

/// Exhaustive minimum-weight logical search up to `w_cap`, for small codes only.
///
/// An X-type vector is a nontrivial logical when it lies in `ker H_Z` but not in
/// the row space of `H_X` (and symmetrically for Z).
pub fn brute_force_distance(code: &CxcCode, w_cap: usize) -> BruteForceDistance {
    BruteForceDistance {
        x: one_sided_distance(&code.hz, &code.hx, w_cap),
        z: one_sided_distance(&code.hx, &code.hz, w_cap),
    }
}

fn one_sided_distance(commute_with: &BitMatrix, trivial_rows: &BitMatrix, w_cap: usize) -> DistanceBound {
    let n = commute_with.cols();
    let cols: Vec<BitVec> = (0..n).map(|j| commute_with.column(j)).collect();
    let mut span = SpanBasis::new(n);
    for i in 0..trivial_rows.rows() {
        span.insert(&trivial_rows.row(i));
    }
    for w in 1..=w_cap.min(n) {
        let mut chosen = Vec::with_capacity(w);
        if search_weight(&cols, &span, w, 0, &mut chosen, BitVec::zeros(commute_with.rows())) {
            return DistanceBound::Exact(w);
        }
    }
    DistanceBound::AtLeast(w_cap + 1)
}

fn search_weight(cols: &[BitVec], span: &SpanBasis, w: usize, start: usize, chosen: &mut Vec<usize>, syndrome: BitVec) -> bool {
    if chosen.len() == w {
        if !syndrome.is_zero() {
            return false;
        }
        let v = BitVec::from_support(cols.len(), chosen.iter().copied());
        return !span.contains(&v);
    }
    let left = w - chosen.len();
    for j in start..=cols.len() - left {
        let mut s = syndrome.clone();
        s.xor_assign(&cols[j]);
        chosen.push(j);
        let found = search_weight(cols, span, w, j + 1, chosen, s);
        chosen.pop();
        if found {
            return true;
        }
    }
    false
}

/// One record of the code catalog JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub family: Family,
    pub a: usize,
    pub b: usize,
    #[serde(rename = "supportA")]
    pub support_a: Vec<usize>,
    #[serde(rename = "supportB")]
    pub support_b: Vec<usize>,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub omega: usize,
    pub rank: usize,
}

impl CatalogEntry {
    pub fn from_code(code: &CxcCode) -> Result<Self, CodeError> {
        let p = code_params(code)?;
        Ok(Self {
            family: code.family,
            a: code.a(),
            b: code.b(),
            support_a: code.poly_a.support().to_vec(),
            support_b: code.poly_b.support().to_vec(),
            n: p.n,
            k: p.k,
            d: p.d,
            omega: p.omega,
            rank: p.stabilizer_rank,
        })
    }

    pub fn build(&self) -> Result<CxcCode, CodeError> {
        let pa = CyclicPoly::new(self.a, self.support_a.clone())?;
        let pb = CyclicPoly::new(self.b, self.support_b.clone())?;
        build_with_family(self.family, &pa, &pb)
    }
}
