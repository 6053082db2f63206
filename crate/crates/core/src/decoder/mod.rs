//! Sum-product belief propagation with ordered-statistics post-processing.

mod bp;
mod osd;

pub use bp::{bp_decode, BpOutput, BpScratch};
pub use osd::{osd_postprocess, OsdOutput};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec};
use crate::noise::{DetectorErrorModel, ShotBatch};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("syndrome is not in the column space of the check matrix")]
    InconsistentSyndrome,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("prior {0} outside (0, 0.5]")]
    InvalidPrior(String),
}

/// Check matrix stored as per-check and per-fault adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseCheckMatrix {
    rows: usize,
    cols: usize,
    check_faults: Vec<Vec<u32>>,
    fault_checks: Vec<Vec<u32>>,
}

impl SparseCheckMatrix {
    /// Builds from per-fault detector lists.
    pub fn from_columns(rows: usize, columns: Vec<Vec<u32>>) -> Result<Self, DecodeError> {
        let mut check_faults = vec![Vec::new(); rows];
        for (f, col) in columns.iter().enumerate() {
            for &d in col {
                let slot = check_faults
                    .get_mut(d as usize)
                    .ok_or_else(|| DecodeError::DimensionMismatch(format!("detector {d} >= {rows}")))?;
                slot.push(f as u32);
            }
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            check_faults,
            fault_checks: columns,
        })
    }

    pub fn from_dense(m: &BitMatrix) -> Self {
        let columns = (0..m.cols()).map(|j| m.column(j).ones().map(|i| i as u32).collect()).collect();
        Self::from_columns(m.rows(), columns).expect("dense matrix is consistent")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn check(&self, i: usize) -> &[u32] {
        &self.check_faults[i]
    }

    pub fn fault(&self, j: usize) -> &[u32] {
        &self.fault_checks[j]
    }

    pub fn edges(&self) -> usize {
        self.fault_checks.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for (j, col) in self.fault_checks.iter().enumerate() {
            for &i in col {
                m.set(i as usize, j, true);
            }
        }
        m
    }

    pub fn syndrome(&self, e: &BitVec) -> BitVec {
        let mut s = BitVec::zeros(self.rows);
        for j in e.ones() {
            for &i in &self.fault_checks[j] {
                s.flip(i as usize);
            }
        }
        s
    }

    /// Both adjacency lists describe the same matrix.
    pub fn is_consistent(&self) -> bool {
        let mut count = 0;
        for (i, faults) in self.check_faults.iter().enumerate() {
            for &f in faults {
                count += 1;
                if !self.fault_checks[f as usize].contains(&(i as u32)) {
                    return false;
                }
            }
        }
        count == self.edges()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OsdMode {
    /// All `2^λ` flip patterns on the first `λ` non-pivot positions.
    Exhaustive,
    /// Single flips on every non-pivot position plus pairs on the first `λ`.
    CombinationSweep,
}

impl std::str::FromStr for OsdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(OsdMode::Exhaustive),
            "combination_sweep" | "combination-sweep" => Ok(OsdMode::CombinationSweep),
            other => Err(format!("unknown OSD mode {other:?} (expected exhaustive or combination_sweep)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub max_iter: usize,
    pub osd_order: usize,
    pub osd_mode: OsdMode,
    pub clamp: f64,
    pub force_osd: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            osd_order: 5,
            osd_mode: OsdMode::Exhaustive,
            clamp: 30.0,
            force_osd: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub correction: BitVec,
    pub converged: bool,
    pub iterations: usize,
    pub posteriors: Vec<f64>,
    pub used_osd: bool,
}

/// Decoder bound to one check matrix and prior vector.
#[derive(Clone, Debug)]
pub struct BpOsdDecoder {
    h: SparseCheckMatrix,
    priors: Vec<f64>,
    config: DecoderConfig,
    rank: usize,
}

impl BpOsdDecoder {
    pub fn new(h: SparseCheckMatrix, priors: Vec<f64>, config: DecoderConfig) -> Result<Self, DecodeError> {
        if priors.len() != h.cols() {
            return Err(DecodeError::DimensionMismatch(format!(
                "{} priors for {} faults",
                priors.len(),
                h.cols()
            )));
        }
        if let Some(p) = priors.iter().find(|&&p| !(p > 0.0 && p <= 0.5)) {
            return Err(DecodeError::InvalidPrior(p.to_string()));
        }
        let rank = h.to_dense().transpose().rank();
        Ok(Self { h, priors, config, rank })
    }

    pub fn from_dem(dem: &DetectorErrorModel, config: DecoderConfig) -> Result<Self, DecodeError> {
        let columns = dem.faults.iter().map(|f| f.detectors.clone()).collect();
        let h = SparseCheckMatrix::from_columns(dem.num_detectors, columns)?;
        Self::new(h, dem.faults.iter().map(|f| f.prob).collect(), config)
    }

    pub fn check_matrix(&self) -> &SparseCheckMatrix {
        &self.h
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn scratch(&self) -> BpScratch {
        BpScratch::new(&self.h)
    }

    pub fn decode(&self, syndrome: &BitVec) -> Result<DecodeResult, DecodeError> {
        self.decode_with(syndrome, &mut self.scratch())
    }

    pub fn decode_with(&self, syndrome: &BitVec, scratch: &mut BpScratch) -> Result<DecodeResult, DecodeError> {
        if syndrome.len() != self.h.rows() {
            return Err(DecodeError::DimensionMismatch(format!(
                "syndrome length {} for {} detectors",
                syndrome.len(),
                self.h.rows()
            )));
        }
        let bp = bp_decode(&self.h, &self.priors, syndrome, self.config.max_iter, self.config.clamp, scratch);
        if bp.converged && !self.config.force_osd {
            return Ok(DecodeResult {
                correction: bp.correction,
                converged: true,
                iterations: bp.iterations,
                posteriors: bp.posteriors,
                used_osd: false,
            });
        }
        let osd = osd_postprocess(
            &self.h,
            &bp.posteriors,
            syndrome,
            self.config.osd_order,
            self.config.osd_mode,
            self.rank,
        )?;
        Ok(DecodeResult {
            correction: osd.correction,
            converged: bp.converged,
            iterations: bp.iterations,
            posteriors: bp.posteriors,
            used_osd: true,
        })
    }
}

/// Per-shot outcome of [`decode_batch`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub shot: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Observables whose prediction disagreed with the sampled flip.
    pub failure_bits: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchOutcome {
    pub shots: usize,
    pub failures: usize,
    pub per_logical: Vec<usize>,
    pub bp_converged: usize,
    pub records: Vec<ShotRecord>,
}

/// Decodes every shot and counts logical failures: a shot fails when any
/// predicted observable flip differs from the sampled one.
pub fn decode_batch(dem: &DetectorErrorModel, shots: &ShotBatch, config: &DecoderConfig) -> Result<BatchOutcome, DecodeError> {
    let decoder = BpOsdDecoder::from_dem(dem, *config)?;
    decode_batch_with(&decoder, dem, shots)
}

pub fn decode_batch_with(decoder: &BpOsdDecoder, dem: &DetectorErrorModel, shots: &ShotBatch) -> Result<BatchOutcome, DecodeError> {
    if shots.num_detectors() != dem.num_detectors || shots.num_observables() != dem.num_observables {
        return Err(DecodeError::DimensionMismatch(format!(
            "batch has {}/{} detectors/observables, model has {}/{}",
            shots.num_detectors(),
            shots.num_observables(),
            dem.num_detectors,
            dem.num_observables
        )));
    }
    let k = dem.num_observables;
    let records: Vec<ShotRecord> = (0..shots.shots())
        .into_par_iter()
        .map_init(
            || decoder.scratch(),
            |scratch, s| -> Result<ShotRecord, DecodeError> {
                let syndrome = shots.detectors.row(s);
                let res = decoder.decode_with(&syndrome, scratch)?;
                let mut predicted = vec![false; k];
                for j in res.correction.ones() {
                    for &o in &dem.faults[j].observables {
                        predicted[o as usize] ^= true;
                    }
                }
                let failure_bits = (0..k)
                    .filter(|&o| predicted[o] != shots.observables.bit(s, o))
                    .map(|o| o as u32)
                    .collect();
                Ok(ShotRecord {
                    shot: s,
                    converged: res.converged,
                    iterations: res.iterations,
                    failure_bits,
                })
            },
        )
        .collect::<Result<_, _>>()?;
    let mut per_logical = vec![0; k];
    let mut failures = 0;
    for r in &records {
        failures += usize::from(!r.failure_bits.is_empty());
        for &o in &r.failure_bits {
            per_logical[o as usize] += 1;
        }
    }
    Ok(BatchOutcome {
        shots: shots.shots(),
        failures,
        per_logical,
        bp_converged: records.iter().filter(|r| r.converged).count(),
        records,
    })
}
