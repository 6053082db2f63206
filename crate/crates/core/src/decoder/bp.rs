use std::collections::HashMap;

use super::SparseCheckMatrix;
use crate::gf2::BitVec;

/// Edge-indexed message buffers, reusable across shots.
#[derive(Clone, Debug)]
pub struct BpScratch {
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    tanh: Vec<f64>,
}

impl BpScratch {
    pub fn new(h: &SparseCheckMatrix) -> Self {
        let mut check_ptr = vec![0];
        let mut edge_var = Vec::with_capacity(h.edges());
        let mut per_var: Vec<Vec<u32>> = vec![Vec::new(); h.cols()];
        for i in 0..h.rows() {
            for &f in h.check(i) {
                per_var[f as usize].push(edge_var.len() as u32);
                edge_var.push(f);
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0];
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for list in per_var {
            var_edges.extend(list);
            var_ptr.push(var_edges.len());
        }
        let e = edge_var.len();
        Self {
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            tanh: vec![0.0; e],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpOutput {
    pub correction: BitVec,
    pub converged: bool,
    pub iterations: usize,
    /// Posterior log-likelihood ratios `ln(P(0)/P(1))` per fault.
    pub posteriors: Vec<f64>,
}

/// Sum-product decoding with a flooding schedule.
///
/// Stops as soon as the hard decision reproduces `syndrome`; a zero syndrome
/// returns the zero correction after 0 iterations.
pub fn bp_decode(h: &SparseCheckMatrix, priors: &[f64], syndrome: &BitVec, max_iter: usize, clamp: f64, s: &mut BpScratch) -> BpOutput {
    let (m, n) = (h.rows(), h.cols());
    let prior_llr: Vec<f64> = priors.iter().map(|&p| ((1.0 - p) / p).ln()).collect();
    let mut posteriors = prior_llr.clone();
    let mut hard = BitVec::zeros(n);
    for (j, &l) in prior_llr.iter().enumerate() {
        if l < 0.0 {
            hard.set(j, true);
        }
    }
    if h.syndrome(&hard) == *syndrome {
        return BpOutput {
            correction: hard,
            converged: true,
            iterations: 0,
            posteriors,
        };
    }
    for (e, &v) in s.edge_var.iter().enumerate() {
        s.v2c[e] = prior_llr[v as usize];
    }
    let checks: Vec<bool> = (0..m).map(|i| syndrome.get(i)).collect();
    let mut parity = vec![false; m];
    let mut cycle = CycleSkip::default();

    let mut it = 0;
    while it < max_iter {
        it += 1;
        for (c, &flip) in checks.iter().enumerate() {
            let (lo, hi) = (s.check_ptr[c], s.check_ptr[c + 1]);
            let mut acc = 1.0;
            for e in lo..hi {
                let t = 1.0 - 2.0 / (s.v2c[e].exp() + 1.0);
                s.tanh[e] = t;
                s.c2v[e] = acc;
                acc *= t;
            }
            let sign = if flip { -1.0 } else { 1.0 };
            let mut acc = 1.0;
            for e in (lo..hi).rev() {
                let prod = s.c2v[e] * acc;
                acc *= s.tanh[e];
                s.c2v[e] = (sign * ((1.0 + prod) / (1.0 - prod)).ln()).clamp(-clamp, clamp);
            }
        }
        parity.fill(false);
        for v in 0..n {
            let (lo, hi) = (s.var_ptr[v], s.var_ptr[v + 1]);
            let mut total = prior_llr[v];
            for &e in &s.var_edges[lo..hi] {
                total += s.c2v[e as usize];
            }
            posteriors[v] = total;
            for &e in &s.var_edges[lo..hi] {
                let e = e as usize;
                s.v2c[e] = (total - s.c2v[e]).clamp(-clamp, clamp);
            }
            if total < 0.0 {
                for &c in h.fault(v) {
                    parity[c as usize] ^= true;
                }
            }
        }
        if parity == checks {
            for (j, &l) in posteriors.iter().enumerate() {
                hard.set(j, l < 0.0);
            }
            return BpOutput {
                correction: hard,
                converged: true,
                iterations: it,
                posteriors,
            };
        }
        it = cycle.advance(it, max_iter, &s.v2c);
    }
    for (j, &l) in posteriors.iter().enumerate() {
        hard.set(j, l < 0.0);
    }
    BpOutput {
        correction: hard,
        converged: false,
        iterations: max_iter,
        posteriors,
    }
}

/// Detects an exactly repeating message state so that whole periods of a
/// stationary or cyclic iteration can be skipped without changing the result
/// reached after `max_iter` iterations.
#[derive(Default)]
struct CycleSkip {
    history: Vec<u64>,
    seen: HashMap<u64, usize>,
    /// Period under confirmation and the iteration at which it is confirmed.
    pending: Option<(usize, usize)>,
    done: bool,
}

impl CycleSkip {
    /// Records the state after iteration `it` and returns the iteration
    /// count to continue from.
    fn advance(&mut self, it: usize, max_iter: usize, state: &[f64]) -> usize {
        if self.done {
            return it;
        }
        let h = fingerprint(state);
        self.history.push(h);
        debug_assert_eq!(self.history.len(), it);
        if let Some((period, confirm_at)) = self.pending {
            if self.history[it - 1 - period] != h {
                self.pending = None;
            } else if it == confirm_at {
                self.done = true;
                let skip = (max_iter - it) / period * period;
                return it + skip;
            }
        }
        if self.pending.is_none() {
            if let Some(&prev) = self.seen.get(&h) {
                let period = it - prev;
                self.pending = Some((period, it + period));
            }
        }
        self.seen.insert(h, it);
        it
    }
}

fn fingerprint(state: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for x in state {
        h = (h ^ x.to_bits()).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(31);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eventually periodic map: a tail of 6 steps into a 3-cycle.
    fn step(x: f64) -> f64 {
        if x < 6.0 {
            x + 1.0
        } else {
            6.0 + ((x - 6.0 + 1.0) % 3.0)
        }
    }

    #[test]
    fn cycle_skip_preserves_final_state() {
        for max_iter in [5, 12, 100, 101, 102, 10_000] {
            let mut direct = 0.0;
            for _ in 0..max_iter {
                direct = step(direct);
            }
            let mut skip = CycleSkip::default();
            let (mut it, mut x, mut evaluated) = (0, 0.0, 0);
            while it < max_iter {
                it += 1;
                x = step(x);
                evaluated += 1;
                it = skip.advance(it, max_iter, &[x]);
            }
            assert_eq!(it, max_iter);
            assert_eq!(x, direct, "max_iter={max_iter}");
            assert!(evaluated <= 20, "{evaluated}");
        }
    }
}
