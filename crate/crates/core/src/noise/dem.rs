use std::collections::HashMap;
use std::fmt::Write as _;

use super::experiment::{ExperimentCircuit, Op};
use super::sample::parity_rows;
use crate::frame::FrameSim;

/// One merged fault mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct DemFault {
    pub prob: f64,
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub faults: Vec<DemFault>,
}

#[derive(Debug, thiserror::Error)]
pub enum DemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl DetectorErrorModel {
    pub fn num_faults(&self) -> usize {
        self.faults.len()
    }

    /// One line per fault: `error(p) D<i>… L<j>…`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# detectors={} observables={}", self.num_detectors, self.num_observables);
        for f in &self.faults {
            let _ = write!(out, "error({})", f.prob);
            for d in &f.detectors {
                let _ = write!(out, " D{d}");
            }
            for l in &f.observables {
                let _ = write!(out, " L{l}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, DemError> {
        let err = |line: usize, message: String| DemError::Parse { line, message };
        let mut dem = DetectorErrorModel {
            num_detectors: 0,
            num_observables: 0,
            faults: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                for kv in h.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("detectors", v)) => dem.num_detectors = v.parse().map_err(|_| err(i + 1, format!("bad count {v:?}")))?,
                        Some(("observables", v)) => dem.num_observables = v.parse().map_err(|_| err(i + 1, format!("bad count {v:?}")))?,
                        _ => {}
                    }
                }
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            let prob = head
                .strip_prefix("error(")
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| err(i + 1, format!("expected error(p), got {head:?}")))?;
            let mut fault = DemFault {
                prob,
                detectors: Vec::new(),
                observables: Vec::new(),
            };
            for t in tokens {
                let parsed = |s: &str| s.parse::<u32>().map_err(|_| err(i + 1, format!("bad target {t:?}")));
                if let Some(d) = t.strip_prefix('D') {
                    let d = parsed(d)?;
                    dem.num_detectors = dem.num_detectors.max(d as usize + 1);
                    fault.detectors.push(d);
                } else if let Some(l) = t.strip_prefix('L') {
                    let l = parsed(l)?;
                    dem.num_observables = dem.num_observables.max(l as usize + 1);
                    fault.observables.push(l);
                } else {
                    return Err(err(i + 1, format!("bad target {t:?}")));
                }
            }
            dem.faults.push(fault);
        }
        Ok(dem)
    }
}

/// Elementary fault: Pauli `(x, z)` on one or two qubits injected right after
/// noise op `op`.
#[derive(Clone, Copy, Debug)]
struct Atom {
    op: usize,
    prob: f64,
    first: (u32, bool, bool),
    second: Option<(u32, bool, bool)>,
}

fn atoms(circuit: &ExperimentCircuit) -> Vec<Atom> {
    let mut out = Vec::new();
    for (idx, op) in circuit.ops.iter().enumerate() {
        match op {
            Op::Depolarize1 { p, targets } if *p > 0.0 => {
                for &q in targets {
                    for pauli in 1u8..4 {
                        out.push(Atom {
                            op: idx,
                            prob: p / 3.0,
                            first: (q, pauli & 1 == 1, pauli & 2 == 2),
                            second: None,
                        });
                    }
                }
            }
            Op::Depolarize2 { p, pairs } if *p > 0.0 => {
                for &(a, b) in pairs {
                    for pauli in 1u8..16 {
                        out.push(Atom {
                            op: idx,
                            prob: p / 15.0,
                            first: (a, pauli & 1 == 1, pauli & 2 == 2),
                            second: Some((b, pauli & 4 == 4, pauli & 8 == 8)),
                        });
                    }
                }
            }
            Op::XError { p, targets } | Op::ZError { p, targets } if *p > 0.0 => {
                let is_x = matches!(op, Op::XError { .. });
                for &q in targets {
                    out.push(Atom {
                        op: idx,
                        prob: *p,
                        first: (q, is_x, !is_x),
                        second: None,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

const BATCH_LANES: usize = 2048;

/// Propagates every elementary fault of the noisy circuit to its detector and
/// observable signature, merging identical signatures and dropping silent
/// ones. The result is sorted by signature and independent of enumeration
/// order.
pub fn extract_dem(circuit: &ExperimentCircuit) -> DetectorErrorModel {
    let atoms = atoms(circuit);
    let signatures: Vec<Vec<(Vec<u32>, Vec<u32>)>> = {
        use rayon::prelude::*;
        atoms.par_chunks(BATCH_LANES).map(|batch| propagate(circuit, batch)).collect()
    };
    let faults = merge_faults(
        atoms
            .iter()
            .zip(signatures.into_iter().flatten())
            .map(|(atom, sig)| (sig, atom.prob)),
    );
    DetectorErrorModel {
        num_detectors: circuit.num_detectors(),
        num_observables: circuit.num_observables(),
        faults,
    }
}

/// Combines equal signatures as independent flips, `p₁(1−p₂) + p₂(1−p₁)`,
/// drops empty signatures and sorts the result.
pub(crate) fn merge_faults(entries: impl IntoIterator<Item = ((Vec<u32>, Vec<u32>), f64)>) -> Vec<DemFault> {
    let mut merged: HashMap<(Vec<u32>, Vec<u32>), f64> = HashMap::new();
    for (sig, prob) in entries {
        if sig.0.is_empty() && sig.1.is_empty() {
            continue;
        }
        let entry = merged.entry(sig).or_insert(0.0);
        *entry = *entry * (1.0 - prob) + prob * (1.0 - *entry);
    }
    let mut faults: Vec<DemFault> = merged
        .into_iter()
        .map(|((detectors, observables), prob)| DemFault {
            prob,
            detectors,
            observables,
        })
        .collect();
    faults.sort_by(|a, b| (&a.detectors, &a.observables).cmp(&(&b.detectors, &b.observables)));
    faults
}

fn propagate(circuit: &ExperimentCircuit, batch: &[Atom]) -> Vec<(Vec<u32>, Vec<u32>)> {
    let lanes = batch.len();
    let mut sim = FrameSim::new(circuit.num_qubits, lanes);
    let w = sim.words();
    let mut record = vec![0u64; circuit.num_measurements * w];
    let mut m = 0usize;
    // atoms are generated in op order, so a cursor suffices
    let mut cursor = 0usize;
    for (idx, op) in circuit.ops.iter().enumerate() {
        match op {
            Op::ResetZ(t) | Op::ResetX(t) => t.iter().for_each(|&q| sim.reset(q as usize)),
            Op::Cx(pairs) => pairs.iter().for_each(|&(c, t)| sim.cx(c as usize, t as usize)),
            Op::Cz(pairs) => pairs.iter().for_each(|&(a, b)| sim.cz(a as usize, b as usize)),
            Op::MeasureX { targets, reset } => {
                for &q in targets {
                    sim.measure_x_into(q as usize, &mut record[m * w..(m + 1) * w]);
                    m += 1;
                    if *reset {
                        sim.reset(q as usize);
                    }
                }
            }
            Op::MeasureZ(targets) => {
                for &q in targets {
                    sim.measure_z_into(q as usize, &mut record[m * w..(m + 1) * w]);
                    m += 1;
                }
            }
            _ => {}
        }
        while cursor < lanes && batch[cursor].op == idx {
            let a = batch[cursor];
            sim.apply(a.first.0 as usize, cursor, a.first.1, a.first.2);
            if let Some((q, x, z)) = a.second {
                sim.apply(q as usize, cursor, x, z);
            }
            cursor += 1;
        }
    }
    let dets = parity_rows(&circuit.detectors, &record, w, lanes);
    let obs = parity_rows(&circuit.observables, &record, w, lanes);
    (0..lanes)
        .map(|l| {
            (
                dets.row(l).ones().map(|d| d as u32).collect(),
                obs.row(l).ones().map(|o| o as u32).collect(),
            )
        })
        .collect()
}
