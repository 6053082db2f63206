//! Circuit-level noise, memory experiments, Pauli-frame sampling and detector
//! error models.
//!
//! Conventions:
//! - every two-qubit gate is followed by two-qubit depolarizing noise (`p/15`
//!   per non-identity Pauli);
//! - every reset, and the reset half of a measure-reset, is followed by
//!   single-qubit depolarizing noise (`p/3` per Pauli);
//! - every measurement outcome flips with probability `p`;
//! - every qubit not acted on in a time step (including shift steps) suffers
//!   single-qubit depolarizing noise.

mod dem;
mod experiment;
mod sample;

pub use dem::{extract_dem, DemError, DemFault, DetectorErrorModel};
pub use experiment::{
    build_memory_experiment, expected_detector_count, Basis, DetectorInfo, DetectorSet, ExperimentCircuit, ExperimentError,
    MemoryExperiment, Op,
};
pub use sample::{pauli_frame_sample, pauli_frame_sample_with, sample_dem, SampleOptions, ShotBatch, ShotBatchError};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<Self, String> {
        if !(0.0..1.0).contains(&p) {
            return Err(format!("physical error rate {p} outside [0, 1)"));
        }
        Ok(Self { p })
    }
}

/// Inserts the noise channels of `model` into a noiseless experiment.
///
/// With `p = 0` the circuit is returned unchanged.
pub fn annotate_noise(circuit: &ExperimentCircuit, model: &NoiseModel) -> ExperimentCircuit {
    let p = model.p;
    let mut out = circuit.clone();
    if p == 0.0 {
        return out;
    }
    out.ops.clear();
    let nq = circuit.num_qubits;
    let mut touched = vec![false; nq];
    let mut step: Vec<Op> = Vec::new();

    let flush = |step: &mut Vec<Op>, touched: &mut Vec<bool>, ops: &mut Vec<Op>| {
        let idle: Vec<u32> = (0..nq as u32).filter(|&q| !touched[q as usize]).collect();
        ops.append(step);
        if !idle.is_empty() {
            ops.push(Op::Depolarize1 { p, targets: idle });
        }
        touched.fill(false);
    };

    for op in &circuit.ops {
        match op {
            Op::Tick => {
                flush(&mut step, &mut touched, &mut out.ops);
                out.ops.push(Op::Tick);
            }
            Op::ResetZ(t) | Op::ResetX(t) => {
                mark(&mut touched, t);
                step.push(op.clone());
                step.push(Op::Depolarize1 { p, targets: t.clone() });
            }
            Op::Cx(pairs) | Op::Cz(pairs) => {
                for &(a, b) in pairs {
                    touched[a as usize] = true;
                    touched[b as usize] = true;
                }
                step.push(op.clone());
                step.push(Op::Depolarize2 { p, pairs: pairs.clone() });
            }
            Op::MeasureX { targets, reset } => {
                mark(&mut touched, targets);
                step.push(Op::ZError {
                    p,
                    targets: targets.clone(),
                });
                step.push(op.clone());
                if *reset {
                    step.push(Op::Depolarize1 {
                        p,
                        targets: targets.clone(),
                    });
                }
            }
            Op::MeasureZ(t) => {
                mark(&mut touched, t);
                step.push(Op::XError { p, targets: t.clone() });
                step.push(op.clone());
            }
            Op::Depolarize1 { .. } | Op::Depolarize2 { .. } | Op::XError { .. } | Op::ZError { .. } => {
                step.push(op.clone());
            }
        }
    }
    if !step.is_empty() {
        flush(&mut step, &mut touched, &mut out.ops);
    }
    out.noise_p = p;
    out
}

fn mark(touched: &mut [bool], targets: &[u32]) {
    for &q in targets {
        touched[q as usize] = true;
    }
}

#[cfg(test)]
mod tests;
