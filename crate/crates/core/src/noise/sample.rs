use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dem::DetectorErrorModel;
use super::experiment::{ExperimentCircuit, Op};
use crate::frame::FrameSim;
use crate::gf2::BitMatrix;

const MAGIC: &[u8; 4] = b"SHB1";

/// Sampled detector and observable flips, one row per shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotBatch {
    pub seed: u64,
    pub detectors: BitMatrix,
    pub observables: BitMatrix,
}

#[derive(Debug, thiserror::Error)]
pub enum ShotBatchError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("truncated shot batch: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
}

impl ShotBatch {
    pub fn shots(&self) -> usize {
        self.detectors.rows()
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.cols()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.cols()
    }

    /// Packed binary form: 16-byte header (magic, D, K, shots as little-endian
    /// u32), then per shot the detector bits followed by the observable bits,
    /// least significant bit first, padded to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (d, k, shots) = (self.num_detectors(), self.num_observables(), self.shots());
        let per = (d + k).div_ceil(8);
        let mut out = Vec::with_capacity(16 + per * shots);
        out.extend_from_slice(MAGIC);
        for v in [d, k, shots] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for s in 0..shots {
            let mut buf = vec![0u8; per];
            let (det, obs) = (self.detectors.row(s), self.observables.row(s));
            for b in det.ones().chain(obs.ones().map(|j| d + j)) {
                buf[b / 8] |= 1 << (b % 8);
            }
            out.extend_from_slice(&buf);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], seed: u64) -> Result<Self, ShotBatchError> {
        if bytes.len() < 16 {
            return Err(ShotBatchError::Truncated {
                expected: 16,
                got: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(ShotBatchError::BadMagic);
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        let (d, k, shots) = (word(1), word(2), word(3));
        let per = (d + k).div_ceil(8);
        let expected = 16 + per * shots;
        if bytes.len() != expected {
            return Err(ShotBatchError::Truncated {
                expected,
                got: bytes.len(),
            });
        }
        let mut detectors = BitMatrix::zeros(shots, d);
        let mut observables = BitMatrix::zeros(shots, k);
        for s in 0..shots {
            let row = &bytes[16 + s * per..16 + (s + 1) * per];
            for b in 0..d + k {
                if row[b / 8] >> (b % 8) & 1 == 1 {
                    if b < d {
                        detectors.set(s, b, true);
                    } else {
                        observables.set(s, b - d, true);
                    }
                }
            }
        }
        Ok(Self {
            seed,
            detectors,
            observables,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    /// Lanes simulated together; rounded up to a multiple of 64.
    pub chunk: usize,
    /// Randomize the frame components that act trivially after resets and
    /// measurements. Non-deterministic detectors then fire at rate 1/2.
    pub randomize_gauge: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            chunk: 1024,
            randomize_gauge: false,
        }
    }
}

pub fn pauli_frame_sample(circuit: &ExperimentCircuit, shots: usize, seed: u64) -> ShotBatch {
    pauli_frame_sample_with(circuit, shots, seed, &SampleOptions::default())
}

/// Monte Carlo sampling of detector and observable flips.
///
/// Shots are split into fixed-size chunks; chunk `c` draws from a ChaCha8
/// stream `c` keyed by `seed`, so the batch does not depend on the number of
/// worker threads.
pub fn pauli_frame_sample_with(circuit: &ExperimentCircuit, shots: usize, seed: u64, opts: &SampleOptions) -> ShotBatch {
    let chunk = opts.chunk.div_ceil(64).max(1) * 64;
    let chunks = shots.div_ceil(chunk);
    let parts: Vec<(BitMatrix, BitMatrix)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lanes = chunk.min(shots - c * chunk);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            sample_chunk(circuit, lanes, &mut rng, opts.randomize_gauge)
        })
        .collect();
    let mut detectors = BitMatrix::zeros(shots, circuit.num_detectors());
    let mut observables = BitMatrix::zeros(shots, circuit.num_observables());
    for (c, (d, o)) in parts.into_iter().enumerate() {
        copy_rows(&mut detectors, &d, c * chunk);
        copy_rows(&mut observables, &o, c * chunk);
    }
    ShotBatch {
        seed,
        detectors,
        observables,
    }
}

fn copy_rows(dst: &mut BitMatrix, src: &BitMatrix, offset: usize) {
    for r in 0..src.rows() {
        dst.row_words_mut(offset + r).copy_from_slice(src.row_words(r));
    }
}

/// Positions of successes among `trials` Bernoulli(p) draws, via geometric
/// gaps.
pub(crate) struct BernoulliHits {
    log_q: f64,
    next: usize,
    trials: usize,
    certain: bool,
}

impl BernoulliHits {
    pub(crate) fn new(p: f64, trials: usize) -> Self {
        Self {
            log_q: (-p).ln_1p(),
            next: 0,
            trials: if p > 0.0 { trials } else { 0 },
            certain: p >= 1.0,
        }
    }

    pub(crate) fn next(&mut self, rng: &mut impl Rng) -> Option<usize> {
        if self.next >= self.trials {
            return None;
        }
        if !self.certain {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let gap = (u.ln() / self.log_q).floor();
            if gap >= (self.trials - self.next) as f64 {
                self.next = self.trials;
                return None;
            }
            self.next += gap as usize;
        }
        let hit = self.next;
        self.next += 1;
        Some(hit)
    }
}

fn randomize(words: &mut [u64], lanes: usize, rng: &mut ChaCha8Rng) {
    for (i, w) in words.iter_mut().enumerate() {
        let valid = lanes.saturating_sub(i * 64).min(64);
        let mask = if valid == 64 { !0 } else { (1u64 << valid) - 1 };
        *w ^= rng.gen::<u64>() & mask;
    }
}

fn sample_chunk(circuit: &ExperimentCircuit, lanes: usize, rng: &mut ChaCha8Rng, gauge: bool) -> (BitMatrix, BitMatrix) {
    let mut sim = FrameSim::new(circuit.num_qubits, lanes);
    let w = sim.words();
    let mut record = vec![0u64; circuit.num_measurements * w];
    let mut m = 0usize;
    for op in &circuit.ops {
        match op {
            Op::Tick => {}
            Op::ResetZ(t) => {
                for &q in t {
                    sim.reset(q as usize);
                    if gauge {
                        randomize(sim.z_words_mut(q as usize), lanes, rng);
                    }
                }
            }
            Op::ResetX(t) => {
                for &q in t {
                    sim.reset(q as usize);
                    if gauge {
                        randomize(sim.x_words_mut(q as usize), lanes, rng);
                    }
                }
            }
            Op::Cx(pairs) => pairs.iter().for_each(|&(c, t)| sim.cx(c as usize, t as usize)),
            Op::Cz(pairs) => pairs.iter().for_each(|&(a, b)| sim.cz(a as usize, b as usize)),
            Op::MeasureX { targets, reset } => {
                for &q in targets {
                    let q = q as usize;
                    sim.measure_x_into(q, &mut record[m * w..(m + 1) * w]);
                    m += 1;
                    if *reset {
                        sim.reset(q);
                    }
                    if gauge {
                        randomize(sim.x_words_mut(q), lanes, rng);
                    }
                }
            }
            Op::MeasureZ(targets) => {
                for &q in targets {
                    let q = q as usize;
                    sim.measure_z_into(q, &mut record[m * w..(m + 1) * w]);
                    m += 1;
                    if gauge {
                        randomize(sim.z_words_mut(q), lanes, rng);
                    }
                }
            }
            Op::Depolarize1 { p, targets } => {
                let mut hits = BernoulliHits::new(*p, targets.len() * lanes);
                while let Some(h) = hits.next(rng) {
                    let pauli = rng.gen_range(1u8..4);
                    sim.apply(targets[h / lanes] as usize, h % lanes, pauli & 1 == 1, pauli & 2 == 2);
                }
            }
            Op::Depolarize2 { p, pairs } => {
                let mut hits = BernoulliHits::new(*p, pairs.len() * lanes);
                while let Some(h) = hits.next(rng) {
                    let pauli = rng.gen_range(1u8..16);
                    let (a, b) = pairs[h / lanes];
                    let lane = h % lanes;
                    sim.apply(a as usize, lane, pauli & 1 == 1, pauli & 2 == 2);
                    sim.apply(b as usize, lane, pauli & 4 == 4, pauli & 8 == 8);
                }
            }
            Op::XError { p, targets } => {
                let mut hits = BernoulliHits::new(*p, targets.len() * lanes);
                while let Some(h) = hits.next(rng) {
                    sim.apply(targets[h / lanes] as usize, h % lanes, true, false);
                }
            }
            Op::ZError { p, targets } => {
                let mut hits = BernoulliHits::new(*p, targets.len() * lanes);
                while let Some(h) = hits.next(rng) {
                    sim.apply(targets[h / lanes] as usize, h % lanes, false, true);
                }
            }
        }
    }
    (
        parity_rows(&circuit.detectors, &record, w, lanes),
        parity_rows(&circuit.observables, &record, w, lanes),
    )
}

/// Transposes lane-major parities of measurement sets into shot rows.
pub(crate) fn parity_rows(sets: &[Vec<u32>], record: &[u64], w: usize, lanes: usize) -> BitMatrix {
    let mut out = BitMatrix::zeros(lanes, sets.len());
    let mut acc = vec![0u64; w];
    for (j, set) in sets.iter().enumerate() {
        acc.fill(0);
        for &m in set {
            let m = m as usize;
            for (a, r) in acc.iter_mut().zip(&record[m * w..(m + 1) * w]) {
                *a ^= r;
            }
        }
        for (wi, &word) in acc.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let lane = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if lane < lanes {
                    out.set(lane, j, true);
                }
            }
        }
    }
    out
}

/// Samples shots directly from a detector error model: every fault fires
/// independently with its prior.
pub fn sample_dem(dem: &DetectorErrorModel, shots: usize, seed: u64) -> ShotBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detectors = BitMatrix::zeros(shots, dem.num_detectors);
    let mut observables = BitMatrix::zeros(shots, dem.num_observables);
    for fault in &dem.faults {
        let mut hits = BernoulliHits::new(fault.prob, shots);
        while let Some(s) = hits.next(&mut rng) {
            for &d in &fault.detectors {
                let cur = detectors.bit(s, d as usize);
                detectors.set(s, d as usize, !cur);
            }
            for &o in &fault.observables {
                let cur = observables.bit(s, o as usize);
                observables.set(s, o as usize, !cur);
            }
        }
    }
    ShotBatch {
        seed,
        detectors,
        observables,
    }
}
