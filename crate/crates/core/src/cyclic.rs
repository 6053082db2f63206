//! Classical cyclic codes and the exhaustive best-rate search.
//!
//! A seed polynomial `p` defines the classical code `ker circulant(p)`. The
//! search walks every canonical support of a given weight for every length up
//! to `n_max`, keeps codes passing the [`FilterRules`], and retains the highest
//! rate code per minimum distance.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, CyclicPoly, Gf2Error};

/// Default limit on the number of codewords examined by [`min_distance`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("code has no nonzero codeword (k = 0)")]
    EmptyKernel,
    #[error("distance search for n={n}, k={k} needs more than {cap} codeword evaluations")]
    CapExceeded { n: usize, k: usize, cap: u64 },
    #[error("invalid search range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCode {
    pub poly: CyclicPoly,
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

impl ClassicalCode {
    pub fn weight(&self) -> usize {
        self.poly.weight()
    }

    /// `k1/n1 > k2/n2` without floating point.
    pub fn rate_cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.k * other.n).cmp(&(other.k * self.n))
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// Dimension of the code `ker circulant(poly)`.
pub fn classical_dimension(poly: &CyclicPoly) -> usize {
    poly.modulus() - BitMatrix::circulant(poly).rank()
}

/// `(n, k, d)` of the cyclic code with parity-check circulant `poly`.
pub fn classical_params(poly: &CyclicPoly) -> Result<ClassicalCode, CyclicError> {
    classical_params_with_cap(poly, DEFAULT_ENUMERATION_CAP)
}

pub fn classical_params_with_cap(poly: &CyclicPoly, cap: u64) -> Result<ClassicalCode, CyclicError> {
    let n = poly.modulus();
    let h = BitMatrix::circulant(poly);
    let basis = h.kernel_basis();
    let k = basis.len();
    let d = distance_from_kernel(poly, &basis, cap)?;
    Ok(ClassicalCode {
        poly: poly.clone(),
        n,
        k,
        d,
    })
}

/// Exact minimum weight of a nonzero codeword of `ker circulant(poly)`.
///
/// Two exhaustive strategies are combined and the cheaper one wins: a Gray-code
/// walk over all `2^k - 1` kernel combinations, or a search over increasing
/// weights `t` of vectors containing position 0 (any codeword of a cyclic code
/// can be rotated to contain it). Either way the answer is exact; the total
/// number of evaluated candidates is bounded by `cap`.
pub fn min_distance(poly: &CyclicPoly) -> Result<usize, CyclicError> {
    min_distance_with_cap(poly, DEFAULT_ENUMERATION_CAP)
}

pub fn min_distance_with_cap(poly: &CyclicPoly, cap: u64) -> Result<usize, CyclicError> {
    let basis = BitMatrix::circulant(poly).kernel_basis();
    distance_from_kernel(poly, &basis, cap)
}

fn distance_from_kernel(poly: &CyclicPoly, basis: &[BitVec], cap: u64) -> Result<usize, CyclicError> {
    let n = poly.modulus();
    let k = basis.len();
    if k == 0 {
        return Err(CyclicError::EmptyKernel);
    }
    let enum_cost = if k >= 63 { u64::MAX } else { (1u64 << k) - 1 };
    if n > 64 {
        if enum_cost > cap {
            return Err(CyclicError::CapExceeded { n, k, cap });
        }
        return Ok(gray_min_weight_wide(basis));
    }

    // column j of the circulant as a row mask: rows i with (j - i) mod n in support
    let cols: Vec<u64> = (0..n)
        .map(|j| poly.support().iter().fold(0u64, |m, &e| m | 1u64 << ((j + n - e) % n)))
        .collect();

    let mut spent: u64 = 0;
    for t in 1..=n {
        let cost = binomial(n - 1, t - 1);
        if spent.saturating_add(cost) >= enum_cost {
            break;
        }
        if spent.saturating_add(cost) > cap {
            return Err(CyclicError::CapExceeded { n, k, cap });
        }
        spent += cost;
        if has_codeword_through_zero(&cols, t) {
            return Ok(t);
        }
    }
    if enum_cost > cap {
        return Err(CyclicError::CapExceeded { n, k, cap });
    }
    let words: Vec<u64> = basis.iter().map(|v| v.words()[0]).collect();
    Ok(gray_min_weight(&words))
}

fn gray_min_weight(basis: &[u64]) -> usize {
    let k = basis.len();
    let mut cur = 0u64;
    let mut best = u32::MAX;
    for i in 1u64..(1u64 << k) {
        cur ^= basis[i.trailing_zeros() as usize];
        best = best.min(cur.count_ones());
    }
    best as usize
}

fn gray_min_weight_wide(basis: &[BitVec]) -> usize {
    let k = basis.len();
    let mut cur = BitVec::zeros(basis[0].len());
    let mut best = usize::MAX;
    for i in 1u64..(1u64 << k) {
        cur.xor_assign(&basis[i.trailing_zeros() as usize]);
        best = best.min(cur.weight());
    }
    best
}

/// Is there a weight-`t` codeword containing position 0?
fn has_codeword_through_zero(cols: &[u64], t: usize) -> bool {
    fn rec(cols: &[u64], start: usize, left: usize, syn: u64) -> bool {
        if left == 0 {
            return syn == 0;
        }
        let n = cols.len();
        for j in start..=n - left {
            if rec(cols, j + 1, left - 1, syn ^ cols[j]) {
                return true;
            }
        }
        false
    }
    rec(cols, 1, t - 1, cols[0])
}

fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(u64::MAX as u128) as u64
}

/// Acceptance thresholds applied to every candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterRules {
    pub min_distance: usize,
    pub min_dimension: usize,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            min_distance: 2,
            min_dimension: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_max: usize,
    pub w_min: usize,
    pub w_max: usize,
    pub rules: FilterRules,
    pub cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_max: 40,
            w_min: 2,
            w_max: 5,
            rules: FilterRules::default(),
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Best-rate code per minimum distance for one seed weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestRateTable {
    pub w: usize,
    pub entries: BTreeMap<usize, ClassicalCode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCandidate {
    pub poly: CyclicPoly,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub tables: Vec<BestRateTable>,
    /// Every candidate that passed the filter, in enumeration order.
    pub survivors: Vec<ClassicalCode>,
    pub skipped: Vec<SkippedCandidate>,
    pub evaluated: usize,
}

impl SearchOutcome {
    pub fn table(&self, w: usize) -> Option<&BestRateTable> {
        self.tables.iter().find(|t| t.w == w)
    }

    /// First survivor of seed weight `w` with the given parameters.
    pub fn find(&self, w: usize, n: usize, k: usize, d: usize) -> Option<&ClassicalCode> {
        self.survivors.iter().find(|c| c.weight() == w && c.n == n && c.k == k && c.d == d)
    }
}

/// Canonical supports (lexicographically minimal under rotation) of weight `w` modulo `n`.
pub fn canonical_supports(n: usize, w: usize) -> Vec<CyclicPoly> {
    let mut out = Vec::new();
    if w == 0 || w > n {
        return out;
    }
    let mut chosen = vec![0usize];
    fn rec(n: usize, w: usize, start: usize, chosen: &mut Vec<usize>, out: &mut Vec<CyclicPoly>) {
        if chosen.len() == w {
            let p = CyclicPoly::new(n, chosen.clone()).expect("valid by construction");
            if p.is_canonical() {
                out.push(p);
            }
            return;
        }
        for e in start..n {
            chosen.push(e);
            rec(n, w, e + 1, chosen, out);
            chosen.pop();
        }
    }
    rec(n, w, 1, &mut chosen, &mut out);
    out
}

/// Evaluates every canonical seed of weight `w_min..=w_max` and length `<= n_max`.
pub fn enumerate_cyclic_codes(cfg: &SearchConfig) -> Result<SearchOutcome, CyclicError> {
    if cfg.w_min < 2 || cfg.w_min > cfg.w_max {
        return Err(CyclicError::InvalidRange(format!(
            "need 2 <= w_min <= w_max, got [{}, {}]",
            cfg.w_min, cfg.w_max
        )));
    }
    if cfg.n_max < 2 {
        return Err(CyclicError::InvalidRange(format!("n_max = {} < 2", cfg.n_max)));
    }

    let candidates: Vec<CyclicPoly> = (cfg.w_min..=cfg.w_max)
        .flat_map(|w| (w.max(2)..=cfg.n_max).flat_map(move |n| canonical_supports(n, w)))
        .collect();

    let rules = cfg.rules;
    let results: Vec<Result<Option<ClassicalCode>, SkippedCandidate>> = candidates
        .par_iter()
        .map(|poly| {
            let k = classical_dimension(poly);
            if k < rules.min_dimension.max(1) {
                return Ok(None);
            }
            match classical_params_with_cap(poly, cfg.cap) {
                Ok(code) if code.d >= rules.min_distance => Ok(Some(code)),
                Ok(_) => Ok(None),
                Err(e) => Err(SkippedCandidate {
                    poly: poly.clone(),
                    reason: e.to_string(),
                }),
            }
        })
        .collect();

    let mut survivors = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(Some(code)) => survivors.push(code),
            Ok(None) => {}
            Err(s) => {
                log::warn!("skipping {:?}: {}", s.poly, s.reason);
                skipped.push(s);
            }
        }
    }

    let mut tables: Vec<BestRateTable> = (cfg.w_min..=cfg.w_max)
        .map(|w| BestRateTable {
            w,
            entries: BTreeMap::new(),
        })
        .collect();
    for code in &survivors {
        let table = &mut tables[code.weight() - cfg.w_min];
        match table.entries.get(&code.d) {
            Some(cur) if !better_entry(code, cur) => {}
            _ => {
                table.entries.insert(code.d, code.clone());
            }
        }
    }

    Ok(SearchOutcome {
        tables,
        survivors,
        skipped,
        evaluated: candidates.len(),
    })
}

/// Higher rate wins; ties go to shorter length, then smaller support.
fn better_entry(new: &ClassicalCode, cur: &ClassicalCode) -> bool {
    use std::cmp::Ordering::*;
    match new.rate_cmp(cur) {
        Greater => true,
        Less => false,
        Equal => (new.n, new.poly.support()) < (cur.n, cur.poly.support()),
    }
}

/// CSV header: `w,n_c,k_c,d_c,support,rate,mirror_support`.
pub fn write_tables_csv<W: Write>(tables: &[BestRateTable], out: W) -> Result<(), CyclicError> {
    let mut wtr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CyclicError::Io(e.to_string());
    wtr.write_record(["w", "n_c", "k_c", "d_c", "support", "rate", "mirror_support"])
        .map_err(io)?;
    for t in tables {
        for code in t.entries.values() {
            wtr.write_record([
                t.w.to_string(),
                code.n.to_string(),
                code.k.to_string(),
                code.d.to_string(),
                code.poly.support_string(),
                format!("{:.6}", code.rate()),
                code.poly.reversed().canonical().support_string(),
            ])
            .map_err(io)?;
        }
    }
    wtr.flush().map_err(|e| CyclicError::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: &[usize]) -> CyclicPoly {
        CyclicPoly::new(n, s.to_vec()).unwrap()
    }

    /// Independent oracle: enumerate all 2^n vectors.
    fn brute_params(poly: &CyclicPoly) -> (usize, usize) {
        let n = poly.modulus();
        let h = BitMatrix::circulant(poly);
        let mut count = 0usize;
        let mut best = usize::MAX;
        for x in 1u32..(1 << n) {
            let v = BitVec::from_support(n, (0..n).filter(|i| x >> i & 1 == 1));
            if h.mul_vec(&v).unwrap().is_zero() {
                count += 1;
                best = best.min(v.weight());
            }
        }
        ((count + 1).trailing_zeros() as usize, best)
    }

    #[test]
    fn repetition_params() {
        for n in 2..12 {
            let c = classical_params(&p(n, &[0, 1])).unwrap();
            assert_eq!((c.n, c.k, c.d), (n, 1, n));
        }
    }

    #[test]
    fn hamming_like_seed() {
        let c = classical_params(&p(7, &[0, 1, 3])).unwrap();
        assert_eq!((c.n, c.k, c.d), (7, 3, 4));
    }

    #[test]
    fn full_rank_seed_has_no_distance() {
        assert_eq!(min_distance(&p(5, &[0])), Err(CyclicError::EmptyKernel));
        assert_eq!(min_distance(&p(7, &[0, 1, 2])), Err(CyclicError::EmptyKernel));
    }

    #[test]
    fn cap_is_enforced() {
        // 1 + x^4 mod 8 has k = 4; a cap of 3 cannot cover either strategy
        let r = min_distance_with_cap(&p(8, &[0, 4]), 3);
        assert!(matches!(r, Err(CyclicError::CapExceeded { .. })));
        assert_eq!(min_distance_with_cap(&p(8, &[0, 4]), 1 << 10), Ok(2));
    }

    #[test]
    fn matches_brute_force_on_small_lengths() {
        for n in 2..=13 {
            for w in 2..=4.min(n) {
                for poly in canonical_supports(n, w) {
                    let (k, d) = brute_params(&poly);
                    if k == 0 {
                        assert_eq!(classical_dimension(&poly), 0);
                        continue;
                    }
                    let c = classical_params(&poly).unwrap();
                    assert_eq!((c.k, c.d), (k, d), "{poly:?}");
                    let r = classical_params(&poly.reversed()).unwrap();
                    assert_eq!((r.k, r.d), (c.k, c.d), "reversal {poly:?}");
                }
            }
        }
    }

    #[test]
    fn small_search_weight_two() {
        let cfg = SearchConfig {
            n_max: 5,
            w_min: 2,
            w_max: 2,
            ..Default::default()
        };
        let out = enumerate_cyclic_codes(&cfg).unwrap();
        let t = out.table(2).unwrap();
        // every best-rate entry is a repetition code; [4,2,2] from {0,2} survives
        // the filter but ties [2,1,2] on rate and loses on length
        let got: Vec<_> = t.entries.values().map(|c| (c.n, c.k, c.d)).collect();
        assert_eq!(got, vec![(2, 1, 2), (3, 1, 3), (4, 1, 4), (5, 1, 5)]);
        assert!(out.find(2, 4, 2, 2).is_some());
    }

    #[test]
    fn invalid_ranges() {
        let bad = SearchConfig {
            w_min: 1,
            ..Default::default()
        };
        assert!(enumerate_cyclic_codes(&bad).is_err());
        let bad = SearchConfig {
            w_min: 4,
            w_max: 3,
            ..Default::default()
        };
        assert!(enumerate_cyclic_codes(&bad).is_err());
    }

    #[test]
    fn csv_columns() {
        let cfg = SearchConfig {
            n_max: 7,
            w_min: 3,
            w_max: 3,
            ..Default::default()
        };
        let out = enumerate_cyclic_codes(&cfg).unwrap();
        let mut buf = Vec::new();
        write_tables_csv(&out.tables, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("w,n_c,k_c,d_c,support,rate,mirror_support\n"));
        assert!(text.contains("3,7,3,4,\"0,1,3\",0.428571,\"0,1,5\""), "{text}");
    }
}
