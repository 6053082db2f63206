use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{gen_circuit, CheckType, CircuitError, Layer, Variant};
use crate::cxc::{logical_basis, CodeError, CxcCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            other => Err(format!("unknown memory basis {other:?}")),
        }
    }
}

/// Which check outcomes become detectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorSet {
    /// Only checks of the memory basis (Z checks for Z-memory).
    #[default]
    MemoryBasis,
    /// Also the consecutive-round comparisons of the other check type.
    Both,
}

impl std::str::FromStr for DetectorSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "memory_basis" | "memory-basis" => Ok(DetectorSet::MemoryBasis),
            "both" => Ok(DetectorSet::Both),
            other => Err(format!("unknown detector set {other:?} (expected memory_basis or both)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryExperiment {
    pub basis: Basis,
    pub variant: Variant,
    pub rounds: usize,
    #[serde(default)]
    pub detectors: DetectorSet,
}

impl MemoryExperiment {
    pub fn new(basis: Basis, variant: Variant, rounds: usize) -> Self {
        Self {
            basis,
            variant,
            rounds,
            detectors: DetectorSet::MemoryBasis,
        }
    }
}

/// Circuit instructions. Qubit ids are `u32`; data qubits come first.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Tick,
    ResetZ(Vec<u32>),
    ResetX(Vec<u32>),
    /// Control → target pairs.
    Cx(Vec<(u32, u32)>),
    Cz(Vec<(u32, u32)>),
    MeasureX {
        targets: Vec<u32>,
        reset: bool,
    },
    MeasureZ(Vec<u32>),
    Depolarize1 {
        p: f64,
        targets: Vec<u32>,
    },
    Depolarize2 {
        p: f64,
        pairs: Vec<(u32, u32)>,
    },
    XError {
        p: f64,
        targets: Vec<u32>,
    },
    ZError {
        p: f64,
        targets: Vec<u32>,
    },
}

impl Op {
    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            Op::Depolarize1 { .. } | Op::Depolarize2 { .. } | Op::XError { .. } | Op::ZError { .. }
        )
    }

    /// Number of independent fault locations carried by a noise op.
    pub fn fault_locations(&self) -> usize {
        match self {
            Op::Depolarize1 { targets, .. } | Op::XError { targets, .. } | Op::ZError { targets, .. } => targets.len(),
            Op::Depolarize2 { pairs, .. } => pairs.len(),
            _ => 0,
        }
    }
}

/// Detector label: check type, row in its parity-check matrix, and round.
/// The final layer reconstructed from data readout has `round == rounds`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorInfo {
    pub kind: CheckType,
    pub row: usize,
    pub round: usize,
}

/// A memory experiment: instructions, detectors and observables as lists of
/// measurement-record indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentCircuit {
    pub num_qubits: usize,
    pub num_data: usize,
    pub ops: Vec<Op>,
    pub num_measurements: usize,
    pub detectors: Vec<Vec<u32>>,
    pub detector_info: Vec<DetectorInfo>,
    pub observables: Vec<Vec<u32>>,
    pub experiment: MemoryExperiment,
    pub noise_p: f64,
}

impl ExperimentCircuit {
    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    pub fn fault_locations(&self) -> usize {
        self.ops.iter().map(Op::fault_locations).sum()
    }

    /// Export in the common stabilizer-circuit text dialect
    /// (`R`, `RX`, `CX`, `CZ`, `MRX`, `MX`, `M`, noise channels, `TICK`,
    /// `DETECTOR`, `OBSERVABLE_INCLUDE`).
    pub fn to_stim(&self) -> String {
        let mut out = String::new();
        let list = |ids: &[u32]| ids.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let pairs = |ps: &[(u32, u32)]| ps.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(" ");
        for op in &self.ops {
            let line = match op {
                Op::Tick => "TICK".to_string(),
                Op::ResetZ(t) => format!("R {}", list(t)),
                Op::ResetX(t) => format!("RX {}", list(t)),
                Op::Cx(p) => format!("CX {}", pairs(p)),
                Op::Cz(p) => format!("CZ {}", pairs(p)),
                Op::MeasureX { targets, reset: true } => format!("MRX {}", list(targets)),
                Op::MeasureX { targets, reset: false } => format!("MX {}", list(targets)),
                Op::MeasureZ(t) => format!("M {}", list(t)),
                Op::Depolarize1 { p, targets } => format!("DEPOLARIZE1({p}) {}", list(targets)),
                Op::Depolarize2 { p, pairs: ps } => format!("DEPOLARIZE2({p}) {}", pairs(ps)),
                Op::XError { p, targets } => format!("X_ERROR({p}) {}", list(targets)),
                Op::ZError { p, targets } => format!("Z_ERROR({p}) {}", list(targets)),
            };
            out.push_str(&line);
            out.push('\n');
        }
        let m = self.num_measurements as i64;
        let recs = |ids: &[u32]| ids.iter().map(|&i| format!("rec[{}]", i as i64 - m)).collect::<Vec<_>>().join(" ");
        for (det, info) in self.detectors.iter().zip(&self.detector_info) {
            let kind = match info.kind {
                CheckType::X => 0,
                CheckType::Z => 1,
            };
            let _ = writeln!(out, "DETECTOR({}, {}, {kind}) {}", info.row, info.round, recs(det));
        }
        for (j, obs) in self.observables.iter().enumerate() {
            let _ = writeln!(out, "OBSERVABLE_INCLUDE({j}) {}", recs(obs));
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Noiseless memory experiment around the syndrome-extraction circuit.
///
/// Z-memory: data reset to |0⟩, `rounds` rounds, transversal Z readout.
/// Detectors, in order: Z checks of round 0; for each later round the Z
/// checks (and with [`DetectorSet::Both`] the X checks) XORed with the
/// previous round of the same check; the Z checks rebuilt from the data
/// readout XORed with the last round. Observables are the Z logicals on the
/// data readout. X-memory swaps the roles of X and Z throughout.
pub fn build_memory_experiment(code: &CxcCode, exp: &MemoryExperiment) -> Result<ExperimentCircuit, ExperimentError> {
    let circuit = gen_circuit(code, exp.rounds, exp.variant)?;
    let logicals = logical_basis(code)?;
    let ab = code.a() * code.b();
    let n = 2 * ab;
    let layout = circuit.layout();
    let anc = |v: usize| (n + v) as u32;

    let mut ops = Vec::new();
    let mut meas = 0u32;
    // record[(type, row, round)] -> measurement index
    let mut record: [Vec<Vec<u32>>; 2] = [vec![Vec::new(); ab], vec![Vec::new(); ab]];
    let slot = |k: CheckType| match k {
        CheckType::X => 0,
        CheckType::Z => 1,
    };

    for layer in &circuit.layers {
        match layer {
            Layer::PrepPlus(ids) => {
                let data: Vec<u32> = (0..n as u32).collect();
                ops.push(match exp.basis {
                    Basis::Z => Op::ResetZ(data),
                    Basis::X => Op::ResetX(data),
                });
                ops.push(Op::ResetX(ids.iter().map(|&v| anc(v)).collect()));
            }
            Layer::Gates { cx, cz } => {
                if !cx.is_empty() {
                    ops.push(Op::Cx(cx.iter().map(|&(v, q)| (anc(v), q as u32)).collect()));
                }
                if !cz.is_empty() {
                    ops.push(Op::Cz(cz.iter().map(|&(v, q)| (anc(v), q as u32)).collect()));
                }
            }
            Layer::MeasureResetX(ids) => {
                for &v in ids {
                    let (kind, _, _) = layout.ancilla_tuple(v);
                    record[slot(kind)][layout.check_row(v)].push(meas);
                    meas += 1;
                }
                ops.push(Op::MeasureX {
                    targets: ids.iter().map(|&v| anc(v)).collect(),
                    reset: true,
                });
            }
            Layer::Shift(_) => {}
        }
        ops.push(Op::Tick);
    }
    let data_base = meas;
    let data: Vec<u32> = (0..n as u32).collect();
    ops.push(match exp.basis {
        Basis::Z => Op::MeasureZ(data),
        Basis::X => Op::MeasureX {
            targets: data,
            reset: false,
        },
    });
    ops.push(Op::Tick);
    meas += n as u32;

    let (memory, other, h, logical_ops) = match exp.basis {
        Basis::Z => (CheckType::Z, CheckType::X, &code.hz, &logicals.z),
        Basis::X => (CheckType::X, CheckType::Z, &code.hx, &logicals.x),
    };
    let d = exp.rounds;
    let mut detectors = Vec::new();
    let mut info = Vec::new();
    for row in 0..ab {
        detectors.push(vec![record[slot(memory)][row][0]]);
        info.push(DetectorInfo {
            kind: memory,
            row,
            round: 0,
        });
    }
    let kinds: &[CheckType] = match exp.detectors {
        DetectorSet::MemoryBasis => &[memory],
        DetectorSet::Both => &[memory, other],
    };
    for r in 1..d {
        for &kind in kinds {
            for row in 0..ab {
                let rec = &record[slot(kind)][row];
                detectors.push(vec![rec[r - 1], rec[r]]);
                info.push(DetectorInfo { kind, row, round: r });
            }
        }
    }
    for row in 0..ab {
        let mut det: Vec<u32> = h.row(row).ones().map(|u| data_base + u as u32).collect();
        det.push(record[slot(memory)][row][d - 1]);
        det.sort_unstable();
        detectors.push(det);
        info.push(DetectorInfo {
            kind: memory,
            row,
            round: d,
        });
    }
    let observables = logical_ops
        .iter()
        .map(|l| l.ones().map(|u| data_base + u as u32).collect())
        .collect();

    Ok(ExperimentCircuit {
        num_qubits: 2 * n,
        num_data: n,
        ops,
        num_measurements: meas as usize,
        detectors,
        detector_info: info,
        observables,
        experiment: *exp,
        noise_p: 0.0,
    })
}

/// Detector count of [`build_memory_experiment`]: `ab` per measured round
/// plus `ab` final checks, and `ab` more per later round with
/// [`DetectorSet::Both`].
pub fn expected_detector_count(a: usize, b: usize, rounds: usize, set: DetectorSet) -> usize {
    let ab = a * b;
    match set {
        DetectorSet::MemoryBasis => ab * (rounds + 1),
        DetectorSet::Both => ab * (rounds + 1) + ab * (rounds - 1),
    }
}
