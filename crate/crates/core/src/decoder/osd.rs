use super::{DecodeError, OsdMode, SparseCheckMatrix};
use crate::gf2::BitVec;

#[derive(Clone, Debug, PartialEq)]
pub struct OsdOutput {
    pub correction: BitVec,
    /// Sum of posterior LLRs over the flipped faults.
    pub soft_weight: f64,
    /// Order-0 solution and its soft weight, kept for comparison.
    pub order0: BitVec,
    pub order0_weight: f64,
    pub candidates: usize,
}

/// Dense row-reduced form of a window of reliability-sorted columns, with
/// the syndrome carried as the last column.
struct Reduced {
    stride: usize,
    data: Vec<u64>,
    window: usize,
    /// `pivots[r]` is the window position of the pivot of row `r`.
    pivots: Vec<usize>,
    is_pivot: Vec<bool>,
}

impl Reduced {
    fn bit(&self, row: usize, col: usize) -> bool {
        (self.data[row * self.stride + col / 64] >> (col % 64)) & 1 == 1
    }
}

fn reduce(h: &SparseCheckMatrix, order: &[usize], window: usize, syndrome: &BitVec, target_rank: usize) -> Reduced {
    let rows = h.rows();
    let stride = (window + 1).div_ceil(64);
    let mut data = vec![0u64; rows * stride];
    for (pos, &f) in order[..window].iter().enumerate() {
        for &c in h.fault(f) {
            data[c as usize * stride + pos / 64] ^= 1 << (pos % 64);
        }
    }
    for c in syndrome.ones() {
        data[c * stride + window / 64] ^= 1 << (window % 64);
    }
    let mut pivots = Vec::new();
    let mut is_pivot = vec![false; window];
    let mut rank = 0;
    let mut scratch = vec![0u64; stride];
    for col in 0..window {
        if rank == target_rank {
            break;
        }
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows).find(|&r| data[r * stride + w] & b != 0) else {
            continue;
        };
        if p != rank {
            for i in 0..stride {
                data.swap(p * stride + i, rank * stride + i);
            }
        }
        scratch.copy_from_slice(&data[rank * stride..(rank + 1) * stride]);
        for r in 0..rows {
            if r != rank && data[r * stride + w] & b != 0 {
                for (x, y) in data[r * stride..(r + 1) * stride].iter_mut().zip(&scratch) {
                    *x ^= y;
                }
            }
        }
        pivots.push(col);
        is_pivot[col] = true;
        rank += 1;
    }
    Reduced {
        stride,
        data,
        window,
        pivots,
        is_pivot,
    }
}

/// Ordered-statistics post-processing.
///
/// Faults are sorted by posterior error probability (descending, ties by
/// index) and an information set is chosen greedily by elimination over a
/// growing window of the sorted columns. Order 0 solves the syndrome on the
/// pivot columns; higher orders also try flip patterns on the leading
/// non-pivot columns and keep the candidate of least soft weight.
pub fn osd_postprocess(
    h: &SparseCheckMatrix,
    posteriors: &[f64],
    syndrome: &BitVec,
    order_lambda: usize,
    mode: OsdMode,
    target_rank: usize,
) -> Result<OsdOutput, DecodeError> {
    let n = h.cols();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| posteriors[a].total_cmp(&posteriors[b]).then(a.cmp(&b)));

    let mut window = n.min(target_rank + 64 + order_lambda);
    let red = loop {
        let red = reduce(h, &order, window, syndrome, target_rank);
        if red.pivots.len() == target_rank || window == n {
            break red;
        }
        window = n.min(2 * window);
    };
    let rank = red.pivots.len();
    let syn_col = red.window;
    if (rank..h.rows()).any(|r| red.bit(r, syn_col)) {
        return Err(DecodeError::InconsistentSyndrome);
    }

    // pivot-row solution as bit words over rows 0..rank
    let words = rank.div_ceil(64).max(1);
    let column_words = |col: usize| -> Vec<u64> {
        let mut v = vec![0u64; words];
        for r in 0..rank {
            if red.bit(r, col) {
                v[r / 64] |= 1 << (r % 64);
            }
        }
        v
    };
    let base = column_words(syn_col);
    let pivot_cost: Vec<f64> = red.pivots.iter().map(|&c| posteriors[order[c]]).collect();
    let cost = |bits: &[u64]| -> f64 {
        let mut total = 0.0;
        for (wi, &w) in bits.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                total += pivot_cost[wi * 64 + w.trailing_zeros() as usize];
                w &= w - 1;
            }
        }
        total
    };

    let free: Vec<usize> = (0..red.window).filter(|&c| !red.is_pivot[c]).collect();
    let lead: Vec<usize> = free.iter().copied().take(order_lambda).collect();
    let patterns: Vec<Vec<usize>> = match mode {
        OsdMode::Exhaustive => (0u64..1 << lead.len())
            .map(|mask| (0..lead.len()).filter(|&i| mask >> i & 1 == 1).map(|i| lead[i]).collect())
            .collect(),
        OsdMode::CombinationSweep => {
            let mut p = vec![Vec::new()];
            p.extend(free.iter().map(|&c| vec![c]));
            for i in 0..lead.len() {
                for j in i + 1..lead.len() {
                    p.push(vec![lead[i], lead[j]]);
                }
            }
            p
        }
    };
    let mut cols_cache: std::collections::HashMap<usize, Vec<u64>> = std::collections::HashMap::new();
    let mut best: Option<(f64, Vec<u64>, Vec<usize>)> = None;
    let mut order0 = None;
    for pat in &patterns {
        let mut bits = base.clone();
        let mut weight = 0.0;
        for &c in pat {
            let col = cols_cache.entry(c).or_insert_with(|| column_words(c));
            for (x, y) in bits.iter_mut().zip(col.iter()) {
                *x ^= y;
            }
            weight += posteriors[order[c]];
        }
        weight += cost(&bits);
        if pat.is_empty() {
            order0 = Some((weight, bits.clone()));
        }
        if best.as_ref().is_none_or(|b| weight < b.0) {
            best = Some((weight, bits, pat.clone()));
        }
    }
    let to_correction = |bits: &[u64], flips: &[usize]| -> BitVec {
        let mut e = BitVec::zeros(n);
        for (r, &c) in red.pivots.iter().enumerate() {
            if bits[r / 64] >> (r % 64) & 1 == 1 {
                e.set(order[c], true);
            }
        }
        for &c in flips {
            e.set(order[c], true);
        }
        e
    };
    let (weight, bits, flips) = best.expect("at least the empty pattern");
    let (w0, b0) = order0.expect("empty pattern is always tried");
    Ok(OsdOutput {
        correction: to_correction(&bits, &flips),
        soft_weight: weight,
        order0: to_correction(&b0, &[]),
        order0_weight: w0,
        candidates: patterns.len(),
    })
}
