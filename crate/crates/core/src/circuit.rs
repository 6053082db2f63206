//! Syndrome-extraction circuits for CxC codes on a cyclic two-row layout.
//!
//! Data qubits `(i, j, k)` sit in the upper row at `u = ab·i + b·j + k`. The
//! lower row holds the X ancillae `(s, t)` at `v = b·s + t` followed by the Z
//! ancillae at `ab + b·s + t`. A shift `(χ, η, ζ)` aligns X ancilla `(s, t)`
//! with data `(χ, s+η, t+ζ)` and Z ancilla `(s+η, t+ζ)` with data
//! `(1-χ, s, t)`.
//!
//! The modular circuit interleaves one shift layer before every gate layer;
//! the packed circuit drops the shifts. In both, the CX of X round `l` and the
//! CZ of Z round `l-1` share a time step.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxc::CxcCode;
use crate::frame::FrameSim;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("exponent {exponent} is not in the support of {factor:?}")]
    ExponentNotInSupport { factor: Factor, exponent: usize },
    #[error("number of rounds must be at least 1")]
    ZeroRounds,
    #[error("circuit has no shift layers")]
    NoShifts,
    #[error("layer {layer}: {detail}")]
    Misaligned { layer: usize, detail: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckType {
    X,
    Z,
}

/// Which circulant a monomial is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    A,
    B,
    At,
    Bt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Modular,
    Packed,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Modular => "modular",
            Variant::Packed => "packed",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "modular" => Ok(Variant::Modular),
            "packed" => Ok(Variant::Packed),
            other => Err(format!("unknown circuit variant {other:?}")),
        }
    }
}

/// Index maps between qubit tuples and linear ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub a: usize,
    pub b: usize,
}

impl Layout {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    pub fn of(code: &CxcCode) -> Self {
        Self::new(code.a(), code.b())
    }

    pub fn num_data(&self) -> usize {
        2 * self.a * self.b
    }

    pub fn num_ancillae(&self) -> usize {
        2 * self.a * self.b
    }

    pub fn data(&self, i: usize, j: usize, k: usize) -> usize {
        self.a * self.b * i + self.b * j + k
    }

    pub fn data_tuple(&self, u: usize) -> (usize, usize, usize) {
        let ab = self.a * self.b;
        (u / ab, (u % ab) / self.b, u % self.b)
    }

    pub fn ancilla(&self, kind: CheckType, s: usize, t: usize) -> usize {
        let offset = match kind {
            CheckType::X => 0,
            CheckType::Z => self.a * self.b,
        };
        offset + self.b * s + t
    }

    pub fn ancilla_tuple(&self, v: usize) -> (CheckType, usize, usize) {
        let ab = self.a * self.b;
        let kind = if v < ab { CheckType::X } else { CheckType::Z };
        let r = v % ab;
        (kind, r / self.b, r % self.b)
    }

    /// Row of `v` within its own parity-check matrix.
    pub fn check_row(&self, v: usize) -> usize {
        v % (self.a * self.b)
    }
}

/// Target alignment of the ancilla row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub chi: usize,
    pub eta: usize,
    pub zeta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    PrepPlus(Vec<usize>),
    /// One time step of CX (X ancilla → data) and CZ (Z ancilla, data) gates.
    Gates {
        cx: Vec<(usize, usize)>,
        cz: Vec<(usize, usize)>,
    },
    MeasureResetX(Vec<usize>),
    Shift(Shift),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub variant: Variant,
    pub a: usize,
    pub b: usize,
    pub rounds: usize,
    pub support_a: Vec<usize>,
    pub support_b: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// One ancilla readout, in circuit order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub layer: usize,
    pub ancilla: usize,
    pub kind: CheckType,
    pub row: usize,
    pub round: usize,
}

impl Circuit {
    pub fn layout(&self) -> Layout {
        Layout::new(self.a, self.b)
    }

    pub fn num_qubits(&self) -> usize {
        4 * self.a * self.b
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Gates { cx, cz } => cx.len() + cz.len(),
                _ => 0,
            })
            .sum()
    }

    /// Every ancilla readout with its `(type, row, round)` label.
    pub fn measurements(&self) -> Vec<Measurement> {
        let layout = self.layout();
        let mut rounds = [0usize; 2];
        let mut out = Vec::new();
        for (idx, layer) in self.layers.iter().enumerate() {
            if let Layer::MeasureResetX(ids) = layer {
                let Some(&first) = ids.first() else { continue };
                let kind = layout.ancilla_tuple(first).0;
                let slot = kind as usize;
                for &v in ids {
                    out.push(Measurement {
                        layer: idx,
                        ancilla: v,
                        kind: layout.ancilla_tuple(v).0,
                        row: layout.check_row(v),
                        round: rounds[slot],
                    });
                }
                rounds[slot] += 1;
            }
        }
        out
    }
}

/// Ancilla/data pairs coupled by one monomial, sorted by ancilla id.
pub fn monomial_incidence(code: &CxcCode, exponent: usize, factor: Factor) -> Result<Vec<(usize, usize)>, CircuitError> {
    let poly = match factor {
        Factor::A | Factor::At => &code.poly_a,
        Factor::B | Factor::Bt => &code.poly_b,
    };
    if !poly.support().contains(&exponent) {
        return Err(CircuitError::ExponentNotInSupport { factor, exponent });
    }
    let layout = Layout::of(code);
    Ok(incidence(&layout, exponent, factor))
}

fn incidence(layout: &Layout, e: usize, factor: Factor) -> Vec<(usize, usize)> {
    let (a, b) = (layout.a, layout.b);
    let mut pairs = Vec::with_capacity(a * b);
    for s in 0..a {
        for t in 0..b {
            pairs.push(match factor {
                Factor::A => (layout.ancilla(CheckType::X, s, t), layout.data(0, (s + e) % a, t)),
                Factor::At => (layout.ancilla(CheckType::Z, (s + e) % a, t), layout.data(1, s, t)),
                Factor::B => (layout.ancilla(CheckType::X, s, t), layout.data(1, s, (t + e) % b)),
                Factor::Bt => (layout.ancilla(CheckType::Z, s, (t + e) % b), layout.data(0, s, t)),
            });
        }
    }
    pairs.sort_unstable();
    pairs
}

pub fn gen_modular_circuit(code: &CxcCode, rounds: usize) -> Result<Circuit, CircuitError> {
    generate(code, rounds, Variant::Modular)
}

pub fn gen_packed_circuit(code: &CxcCode, rounds: usize) -> Result<Circuit, CircuitError> {
    generate(code, rounds, Variant::Packed)
}

pub fn gen_circuit(code: &CxcCode, rounds: usize, variant: Variant) -> Result<Circuit, CircuitError> {
    generate(code, rounds, variant)
}

fn generate(code: &CxcCode, d: usize, variant: Variant) -> Result<Circuit, CircuitError> {
    if d == 0 {
        return Err(CircuitError::ZeroRounds);
    }
    let layout = Layout::of(code);
    let ab = code.a() * code.b();
    let x_ancillae: Vec<usize> = (0..ab).collect();
    let z_ancillae: Vec<usize> = (ab..2 * ab).collect();
    let modular = variant == Variant::Modular;

    let mut layers = vec![Layer::PrepPlus((0..2 * ab).collect())];
    for l in 0..=d {
        for &eta in code.poly_a.support() {
            if modular {
                layers.push(Layer::Shift(Shift { chi: 0, eta, zeta: 0 }));
            }
            let cx = if l < d { incidence(&layout, eta, Factor::A) } else { Vec::new() };
            let cz = if l > 0 { incidence(&layout, eta, Factor::At) } else { Vec::new() };
            layers.push(Layer::Gates { cx, cz });
        }
        if l > 0 {
            layers.push(Layer::MeasureResetX(z_ancillae.clone()));
        }
        if l < d {
            for &zeta in code.poly_b.support() {
                if modular {
                    layers.push(Layer::Shift(Shift { chi: 1, eta: 0, zeta }));
                }
                layers.push(Layer::Gates {
                    cx: incidence(&layout, zeta, Factor::B),
                    cz: incidence(&layout, zeta, Factor::Bt),
                });
            }
            layers.push(Layer::MeasureResetX(x_ancillae.clone()));
        }
    }
    Ok(Circuit {
        variant,
        a: code.a(),
        b: code.b(),
        rounds: d,
        support_a: code.poly_a.support().to_vec(),
        support_b: code.poly_b.support().to_vec(),
        layers,
    })
}

pub fn circuit_depth(circuit: &Circuit) -> usize {
    circuit.layers.len()
}

/// Closed-form depth of the generated circuit.
pub fn expected_depth(w_a: usize, w_b: usize, rounds: usize, variant: Variant) -> usize {
    match variant {
        Variant::Modular => (2 * w_a + 2 * w_b + 2) * rounds + 2 * w_a + 1,
        Variant::Packed => (w_a + w_b + 2) * rounds + w_a + 1,
    }
}

/// Sense in which a row of ancillae travels around the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Forward,
    Backward,
    Still,
}

/// Offsets of the ancilla row reduced modulo `(2, a, b)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ShiftState {
    pub chi: usize,
    pub eta: usize,
    pub zeta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftRecord {
    pub layer: usize,
    pub shift: Shift,
    /// `[ab·χ, b·η, ζ]`, the displacement of the target alignment.
    pub distance: [usize; 3],
    /// Per-component move from the previous state, modulo `(2ab, ab, b)`.
    pub delta: [usize; 3],
    pub cumulative: usize,
    pub x_sense: Sense,
    pub z_sense: Sense,
}

impl ShiftRecord {
    pub fn total_distance(&self) -> usize {
        self.distance.iter().sum()
    }

    /// X and Z ancillae translate in opposite directions whenever they move.
    pub fn opposite_chirality(&self) -> bool {
        self.x_sense != Sense::Still && self.x_sense != self.z_sense
    }
}

pub fn shift_schedule(circuit: &Circuit) -> Result<Vec<ShiftRecord>, CircuitError> {
    let (a, b) = (circuit.a, circuit.b);
    let ab = a * b;
    let mut state = ShiftState::default();
    let mut cumulative = 0;
    let mut out = Vec::new();
    for (idx, layer) in circuit.layers.iter().enumerate() {
        let Layer::Shift(shift) = layer else { continue };
        let distance = [ab * shift.chi, b * shift.eta, shift.zeta];
        let delta = [
            (ab * (2 + shift.chi - state.chi)) % (2 * ab),
            (b * (a + shift.eta - state.eta)) % ab,
            (b + shift.zeta - state.zeta) % b,
        ];
        let moved: usize = delta.iter().sum();
        cumulative += moved;
        let (x_sense, z_sense) = if moved == 0 {
            (Sense::Still, Sense::Still)
        } else {
            (Sense::Forward, Sense::Backward)
        };
        out.push(ShiftRecord {
            layer: idx,
            shift: *shift,
            distance,
            delta,
            cumulative,
            x_sense,
            z_sense,
        });
        state = ShiftState {
            chi: shift.chi % 2,
            eta: shift.eta % a,
            zeta: shift.zeta % b,
        };
    }
    if out.is_empty() {
        return Err(CircuitError::NoShifts);
    }
    Ok(out)
}

/// Checks that every gate in a modular circuit joins vertically aligned
/// positions under the most recent shift.
pub fn check_alignment(circuit: &Circuit) -> Result<(), CircuitError> {
    let layout = circuit.layout();
    let (a, b) = (circuit.a, circuit.b);
    let mut current: Option<Shift> = None;
    for (idx, layer) in circuit.layers.iter().enumerate() {
        match layer {
            Layer::Shift(s) => current = Some(*s),
            Layer::Gates { cx, cz } => {
                let Some(sh) = current else {
                    return Err(CircuitError::Misaligned {
                        layer: idx,
                        detail: "gate layer before any shift".into(),
                    });
                };
                for &(anc, q) in cx {
                    let (kind, s, t) = layout.ancilla_tuple(anc);
                    let want = layout.data(sh.chi, (s + sh.eta) % a, (t + sh.zeta) % b);
                    if kind != CheckType::X || q != want {
                        return Err(CircuitError::Misaligned {
                            layer: idx,
                            detail: format!("CX (a{anc},q{q}) expected partner q{want}"),
                        });
                    }
                }
                for &(anc, q) in cz {
                    let (kind, s, t) = layout.ancilla_tuple(anc);
                    let (i, j, k) = layout.data_tuple(q);
                    let ok = kind == CheckType::Z && i == 1 - sh.chi && s == (j + sh.eta) % a && t == (k + sh.zeta) % b;
                    if !ok {
                        return Err(CircuitError::Misaligned {
                            layer: idx,
                            detail: format!("CZ (a{anc},q{q}) is not aligned under {sh:?}"),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Coverage of the two-qubit gate layers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PackingReport {
    pub gate_layers: usize,
    /// Layers in which all `4ab` qubits take part in exactly one gate.
    pub full_layers: usize,
    /// Layers carrying only CX (first round) or only CZ (last round); these
    /// cover exactly one ancilla type and one data block.
    pub boundary_layers: usize,
    /// Layers where CX targets block 0 and CZ touches block 1 (or the reverse).
    pub interleaved_layers: usize,
    pub violations: Vec<String>,
}

impl PackingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.full_layers + self.boundary_layers == self.gate_layers
    }
}

pub fn packing_report(circuit: &Circuit) -> PackingReport {
    let layout = circuit.layout();
    let ab = circuit.a * circuit.b;
    let nq = 4 * ab;
    let mut report = PackingReport::default();
    for (idx, layer) in circuit.layers.iter().enumerate() {
        let Layer::Gates { cx, cz } = layer else { continue };
        report.gate_layers += 1;
        // data qubits occupy 0..2ab, ancillae 2ab..4ab
        let mut seen = vec![false; nq];
        let mut clash = false;
        for &(anc, q) in cx.iter().chain(cz) {
            for id in [2 * ab + anc, q] {
                clash |= std::mem::replace(&mut seen[id], true);
            }
        }
        if clash {
            report.violations.push(format!("layer {idx}: a qubit is used twice"));
            continue;
        }
        let count = seen.iter().filter(|&&s| s).count();
        let block = |pairs: &[(usize, usize)]| -> Option<usize> {
            let first = layout.data_tuple(pairs.first()?.1).0;
            pairs.iter().all(|p| layout.data_tuple(p.1).0 == first).then_some(first)
        };
        if !cx.is_empty() && !cz.is_empty() {
            if count == nq {
                report.full_layers += 1;
            } else {
                report.violations.push(format!("layer {idx}: {count} of {nq} qubits active"));
            }
            match (block(cx), block(cz)) {
                (Some(x), Some(z)) if x != z => report.interleaved_layers += 1,
                _ => report.violations.push(format!("layer {idx}: CX and CZ share a data block")),
            }
        } else if count == nq / 2 && (block(cx).is_some() || block(cz).is_some()) {
            report.boundary_layers += 1;
        } else {
            report
                .violations
                .push(format!("layer {idx}: partial layer with {count} active qubits"));
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetectorMismatch {
    pub qubit: usize,
    pub pauli: char,
    pub injected_after_layer: usize,
    pub check: (CheckType, usize),
    pub round: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DetectorMapReport {
    pub injection_points: usize,
    pub faults_checked: usize,
    pub mismatches: Vec<DetectorMismatch>,
}

impl DetectorMapReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Injects every single-qubit X and Z data fault at several points in the
/// noiseless circuit and compares the flipped ancilla outcomes with the
/// columns of `H_Z` and `H_X`.
///
/// A fault injected right after preparation must flip its column's checks in
/// every round. A fault injected later must flip each of those checks from
/// some round on (exactly one detection event per check) and nothing else.
pub fn verify_detector_map(code: &CxcCode, circuit: &Circuit) -> DetectorMapReport {
    let layout = circuit.layout();
    let ab = circuit.a * circuit.b;
    let n = 2 * ab;
    let measurements = circuit.measurements();

    // Injection points: after prep, and after each readout that still has
    // two later readouts of both types, so one full round follows.
    let mut points = vec![0usize];
    let readouts: Vec<(usize, CheckType)> = circuit
        .layers
        .iter()
        .enumerate()
        .filter_map(|(idx, l)| match l {
            Layer::MeasureResetX(ids) => ids.first().map(|&v| (idx, layout.ancilla_tuple(v).0)),
            _ => None,
        })
        .collect();
    for &(idx, _) in &readouts {
        let later = |kind| readouts.iter().filter(|&&(j, k)| j > idx && k == kind).count();
        if later(CheckType::X) >= 2 && later(CheckType::Z) >= 2 {
            points.push(idx);
        }
    }

    let mut report = DetectorMapReport {
        injection_points: points.len(),
        ..Default::default()
    };
    let slots = 2 * ab;
    for &point in &points {
        let outcomes = run_with_faults(circuit, point);
        let words = outcomes.first().map_or(0, Vec::len);
        report.faults_checked += 2 * n;
        // per ancilla: outcome words of each later round, lanes packed in bits
        let mut seqs: Vec<Vec<&[u64]>> = vec![Vec::new(); slots];
        for (m, w) in measurements.iter().zip(&outcomes) {
            if m.layer > point {
                seqs[layout.ancilla(m.kind, 0, 0) + m.row].push(w);
            }
        }
        let mut bad = Vec::new();
        for (v, seq) in seqs.iter().enumerate() {
            let (kind, _, _) = layout.ancilla_tuple(v);
            let row = layout.check_row(v);
            let mut expected = vec![0u64; words];
            let (h, offset) = match kind {
                CheckType::Z => (&code.hz, 0),
                CheckType::X => (&code.hx, n),
            };
            for u in h.row(row).ones() {
                expected[(offset + u) / 64] |= 1 << ((offset + u) % 64);
            }
            for wi in 0..words {
                let (mut any, mut all, mut one, mut two, mut prev) = (0u64, !0u64, 0u64, 0u64, 0u64);
                for w in seq {
                    let f = w[wi];
                    let diff = f ^ prev;
                    two |= one & diff;
                    one |= diff;
                    any |= f;
                    all &= f;
                    prev = f;
                }
                let e = expected[wi];
                let wrong = if point == 0 { !all } else { !one | two };
                let mut lanes = (any & !e) | (e & wrong);
                while lanes != 0 {
                    bad.push((wi * 64 + lanes.trailing_zeros() as usize, v));
                    lanes &= lanes - 1;
                }
            }
        }
        bad.sort_unstable();
        for (lane, v) in bad {
            let (qubit, pauli) = if lane < n { (lane, 'X') } else { (lane - n, 'Z') };
            let seq: Vec<bool> = seqs[v].iter().map(|w| (w[lane / 64] >> (lane % 64)) & 1 == 1).collect();
            let first_event = seq
                .iter()
                .scan(false, |prev, &f| Some(std::mem::replace(prev, f) != f))
                .position(|e| e);
            let (kind, _, _) = layout.ancilla_tuple(v);
            let expected = match kind {
                CheckType::Z => lane < n && code.hz.row(layout.check_row(v)).get(qubit),
                CheckType::X => lane >= n && code.hx.row(layout.check_row(v)).get(qubit),
            };
            report.mismatches.push(DetectorMismatch {
                qubit,
                pauli,
                injected_after_layer: point,
                check: (kind, layout.check_row(v)),
                round: first_event.unwrap_or(0),
                detail: format!("expected flip: {expected}, outcomes {seq:?}"),
            });
        }
    }
    report
}

/// Noiseless frame run with lane `u` carrying X on data `u` and lane `n + u`
/// carrying Z on data `u`, injected after layer `point`.
fn run_with_faults(circuit: &Circuit, point: usize) -> Vec<Vec<u64>> {
    let ab = circuit.a * circuit.b;
    let n = 2 * ab;
    let mut sim = FrameSim::new(4 * ab, 2 * n);
    let words = sim.words();
    let mut outcomes = Vec::new();
    for (idx, layer) in circuit.layers.iter().enumerate() {
        match layer {
            Layer::PrepPlus(ids) => ids.iter().for_each(|&v| sim.reset(n + v)),
            Layer::Gates { cx, cz } => {
                cx.iter().for_each(|&(v, q)| sim.cx(n + v, q));
                cz.iter().for_each(|&(v, q)| sim.cz(n + v, q));
            }
            Layer::MeasureResetX(ids) => {
                for &v in ids {
                    let mut w = vec![0u64; words];
                    sim.measure_x_into(n + v, &mut w);
                    outcomes.push(w);
                    sim.reset(n + v);
                }
            }
            Layer::Shift(_) => {}
        }
        if idx == point {
            for u in 0..n {
                sim.apply(u, u, true, false);
                sim.apply(u, n + u, false, true);
            }
        }
    }
    outcomes
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

/// Plain-text form, one layer per line after a `#` header.
pub fn emit_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# circuit variant={} a={} b={} rounds={} A={} B={}",
        circuit.variant,
        circuit.a,
        circuit.b,
        circuit.rounds,
        join(&circuit.support_a),
        join(&circuit.support_b)
    );
    for layer in &circuit.layers {
        match layer {
            Layer::PrepPlus(ids) => {
                out.push_str("PREP_PLUS");
                ids.iter().for_each(|v| {
                    let _ = write!(out, " a{v}");
                });
            }
            Layer::MeasureResetX(ids) => {
                out.push_str("MR_X");
                ids.iter().for_each(|v| {
                    let _ = write!(out, " a{v}");
                });
            }
            Layer::Shift(s) => {
                let _ = write!(out, "SHIFT {} {} {}", s.chi, s.eta, s.zeta);
            }
            Layer::Gates { cx, cz } => {
                let mut parts = Vec::new();
                if !cx.is_empty() || cz.is_empty() {
                    parts.push(gate_list("CX", cx));
                }
                if !cz.is_empty() {
                    parts.push(gate_list("CZ", cz));
                }
                out.push_str(&parts.join(" "));
            }
        }
        out.push('\n');
    }
    out
}

fn gate_list(name: &str, pairs: &[(usize, usize)]) -> String {
    let mut s = name.to_string();
    for (a, q) in pairs {
        let _ = write!(s, " (a{a},q{q})");
    }
    s
}

pub fn parse_text(text: &str) -> Result<Circuit, CircuitError> {
    let perr = |line: usize, message: String| CircuitError::Parse { line, message };
    let mut header: Option<Circuit> = None;
    let mut layers = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(fields) = rest.strip_prefix("circuit") {
                header = Some(parse_header(fields).map_err(|m| perr(line_no, m))?);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        let layer = match head {
            "PREP_PLUS" => Layer::PrepPlus(parse_ids(tokens, 'a').map_err(|m| perr(line_no, m))?),
            "MR_X" => Layer::MeasureResetX(parse_ids(tokens, 'a').map_err(|m| perr(line_no, m))?),
            "SHIFT" => {
                let v = tokens
                    .map(|t| t.parse::<usize>().map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| perr(line_no, m))?;
                let [chi, eta, zeta] = v[..] else {
                    return Err(perr(line_no, "SHIFT takes three integers".into()));
                };
                Layer::Shift(Shift { chi, eta, zeta })
            }
            "CX" | "CZ" => {
                let (mut cx, mut cz) = (Vec::new(), Vec::new());
                let mut into_cz = head == "CZ";
                for tok in tokens {
                    match tok {
                        "CX" => into_cz = false,
                        "CZ" => into_cz = true,
                        pair => {
                            let p = parse_pair(pair).map_err(|m| perr(line_no, m))?;
                            if into_cz {
                                cz.push(p)
                            } else {
                                cx.push(p)
                            }
                        }
                    }
                }
                Layer::Gates { cx, cz }
            }
            other => return Err(perr(line_no, format!("unknown instruction {other:?}"))),
        };
        layers.push(layer);
    }
    let mut circuit = header.ok_or_else(|| perr(0, "missing '# circuit' header".into()))?;
    circuit.layers = layers;
    Ok(circuit)
}

fn parse_header(fields: &str) -> Result<Circuit, String> {
    let mut c = Circuit {
        variant: Variant::Modular,
        a: 0,
        b: 0,
        rounds: 0,
        support_a: Vec::new(),
        support_b: Vec::new(),
        layers: Vec::new(),
    };
    let list = |v: &str| -> Result<Vec<usize>, String> {
        v.split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| format!("bad exponent {s:?}")))
            .collect()
    };
    let num = |v: &str| v.parse::<usize>().map_err(|_| format!("bad number {v:?}"));
    for kv in fields.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("malformed header field {kv:?}"))?;
        match k {
            "variant" => c.variant = v.parse()?,
            "a" => c.a = num(v)?,
            "b" => c.b = num(v)?,
            "rounds" => c.rounds = num(v)?,
            "A" => c.support_a = list(v)?,
            "B" => c.support_b = list(v)?,
            other => return Err(format!("unknown header field {other:?}")),
        }
    }
    Ok(c)
}

fn parse_ids<'a>(tokens: impl Iterator<Item = &'a str>, prefix: char) -> Result<Vec<usize>, String> {
    tokens
        .map(|t| {
            t.strip_prefix(prefix)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| format!("bad qubit id {t:?}"))
        })
        .collect()
}

fn parse_pair(tok: &str) -> Result<(usize, usize), String> {
    let inner = tok
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("bad gate target {tok:?}"))?;
    let (l, r) = inner.split_once(',').ok_or_else(|| format!("bad gate target {tok:?}"))?;
    let a = l.strip_prefix('a').and_then(|s| s.parse().ok());
    let q = r.strip_prefix('q').and_then(|s| s.parse().ok());
    match (a, q) {
        (Some(a), Some(q)) => Ok((a, q)),
        _ => Err(format!("bad gate target {tok:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxc::{build_cxc, build_cxr};
    use crate::gf2::CyclicPoly;
    use proptest::prelude::*;

    fn toric(d: usize) -> CxcCode {
        let p = CyclicPoly::new(d, vec![0, 1]).unwrap();
        build_cxc(&p, &p).unwrap()
    }

    fn cxr_240() -> CxcCode {
        build_cxr(&CyclicPoly::new(15, vec![0, 1, 4]).unwrap()).unwrap()
    }

    #[test]
    fn incidence_examples() {
        let code = toric(2);
        let l = Layout::of(&code);
        let id = monomial_incidence(&code, 0, Factor::A).unwrap();
        assert_eq!(id.len(), 4);
        for s in 0..2 {
            for t in 0..2 {
                assert!(id.contains(&(l.ancilla(CheckType::X, s, t), l.data(0, s, t))));
            }
        }
        let shifted = monomial_incidence(&code, 1, Factor::A).unwrap();
        for t in 0..2 {
            assert!(shifted.contains(&(l.ancilla(CheckType::X, 0, t), l.data(0, 1, t))));
            assert!(shifted.contains(&(l.ancilla(CheckType::X, 1, t), l.data(0, 0, t))));
        }
        assert_eq!(
            monomial_incidence(&code, 5, Factor::B),
            Err(CircuitError::ExponentNotInSupport {
                factor: Factor::B,
                exponent: 5
            })
        );
    }

    #[test]
    fn incidence_reassembles_parity_checks() {
        let code = cxr_240();
        let l = Layout::of(&code);
        let mut hx = crate::gf2::BitMatrix::zeros(code.hx.rows(), code.n());
        let mut hz = hx.clone();
        for (f, poly) in [(Factor::A, &code.poly_a), (Factor::B, &code.poly_b)] {
            for &e in poly.support() {
                for (v, q) in monomial_incidence(&code, e, f).unwrap() {
                    hx.set(l.check_row(v), q, true);
                }
            }
        }
        for (f, poly) in [(Factor::At, &code.poly_a), (Factor::Bt, &code.poly_b)] {
            for &e in poly.support() {
                for (v, q) in monomial_incidence(&code, e, f).unwrap() {
                    hz.set(l.check_row(v), q, true);
                }
            }
        }
        assert_eq!(hx, code.hx);
        assert_eq!(hz, code.hz);
    }

    #[test]
    fn depth_examples() {
        let t = toric(3);
        assert_eq!(circuit_depth(&gen_modular_circuit(&t, 1).unwrap()), 15);
        assert_eq!(circuit_depth(&gen_modular_circuit(&t, 2).unwrap()), 25);
        assert_eq!(circuit_depth(&gen_packed_circuit(&t, 3).unwrap()), 21);
        let c = cxr_240();
        assert_eq!(circuit_depth(&gen_modular_circuit(&c, 8).unwrap()), 103);
        assert_eq!(circuit_depth(&gen_packed_circuit(&c, 8).unwrap()), 60);
        assert_eq!(gen_packed_circuit(&c, 0), Err(CircuitError::ZeroRounds));
    }

    #[test]
    fn shift_schedule_trace() {
        let t = toric(3);
        let sched = shift_schedule(&gen_modular_circuit(&t, 1).unwrap()).unwrap();
        let shifts: Vec<_> = sched.iter().map(|r| (r.shift.chi, r.shift.eta, r.shift.zeta)).collect();
        assert_eq!(shifts, vec![(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 0, 1), (0, 0, 0), (0, 1, 0)]);
        assert_eq!(sched[0].total_distance(), 0);
        assert!(!sched[0].opposite_chirality());
        assert_eq!(sched[1].distance, [0, 3, 0]);
        assert!(sched[1].opposite_chirality());
        assert_eq!(shift_schedule(&gen_packed_circuit(&t, 1).unwrap()), Err(CircuitError::NoShifts));
    }

    #[test]
    fn modular_gates_are_aligned() {
        for code in [toric(3), cxr_240()] {
            check_alignment(&gen_modular_circuit(&code, 3).unwrap()).unwrap();
        }
    }

    #[test]
    fn packed_layers_are_full_inside() {
        let c = cxr_240();
        let circ = gen_packed_circuit(&c, 4).unwrap();
        let r = packing_report(&circ);
        assert!(r.is_ok(), "{:?}", r.violations);
        // first-round and final A layers are the only half-filled ones
        assert_eq!(r.boundary_layers, 2 * c.poly_a.weight());
        assert_eq!(r.interleaved_layers, r.full_layers);
    }

    #[test]
    fn gate_count_per_round() {
        let c = cxr_240();
        let d = 3;
        for circ in [gen_modular_circuit(&c, d).unwrap(), gen_packed_circuit(&c, d).unwrap()] {
            let ab = c.a() * c.b();
            assert_eq!(circ.two_qubit_gate_count(), 2 * c.omega() * ab * d);
        }
    }

    #[test]
    fn measurement_labels() {
        let circ = gen_packed_circuit(&toric(2), 3).unwrap();
        let m = circ.measurements();
        assert_eq!(m.len(), 2 * 4 * 3);
        assert!(m.iter().filter(|x| x.kind == CheckType::Z).all(|x| x.round < 3));
        assert_eq!(m[0].kind, CheckType::X);
    }

    #[test]
    fn detector_map_toric_and_cxr() {
        for code in [toric(3), cxr_240()] {
            for v in [Variant::Modular, Variant::Packed] {
                let circ = gen_circuit(&code, 3, v).unwrap();
                let rep = verify_detector_map(&code, &circ);
                assert!(rep.passed(), "{:?}", &rep.mismatches[..rep.mismatches.len().min(3)]);
                assert!(rep.injection_points >= 3);
            }
        }
        // toric column weight two, CxR X fault on block 0 sees the Bᵀ side
        let t = toric(3);
        assert!((0..t.n()).all(|u| t.hz.column(u).weight() == 2));

        // dropping one CZ must surface as mismatches
        let mut broken = gen_circuit(&t, 3, Variant::Packed).unwrap();
        let removed = broken
            .layers
            .iter_mut()
            .find_map(|l| match l {
                Layer::Gates { cz, .. } if !cz.is_empty() => cz.pop(),
                _ => None,
            })
            .unwrap();
        let rep = verify_detector_map(&t, &broken);
        assert!(!rep.passed());
        assert!(
            rep.mismatches.iter().all(|m| m.pauli == 'X' || m.check.0 == CheckType::Z),
            "{removed:?}"
        );
    }

    #[test]
    fn emission_format() {
        let circ = gen_modular_circuit(&toric(2), 1).unwrap();
        let text = emit_text(&circ);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[1], "PREP_PLUS a0 a1 a2 a3 a4 a5 a6 a7");
        assert_eq!(lines[2], "SHIFT 0 0 0");
        assert!(lines[3].starts_with("CX (a0,q0) (a1,q1)"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 15);
    }

    #[test]
    fn text_round_trip() {
        for v in [Variant::Modular, Variant::Packed] {
            let circ = gen_circuit(&toric(2), 2, v).unwrap();
            assert_eq!(parse_text(&emit_text(&circ)).unwrap(), circ);
        }
        assert!(parse_text("PREP_PLUS a0\n").is_err());
        assert!(parse_text("# circuit a=2 b=2\nFOO\n").is_err());
    }

    proptest! {
        #[test]
        fn index_maps_round_trip(a in 1usize..12, b in 1usize..12, seed in 0usize..10_000) {
            let l = Layout::new(a, b);
            let u = seed % l.num_data();
            let (i, j, k) = l.data_tuple(u);
            prop_assert_eq!(l.data(i, j, k), u);
            let v = seed % l.num_ancillae();
            let (kind, s, t) = l.ancilla_tuple(v);
            prop_assert_eq!(l.ancilla(kind, s, t), v);
        }

        #[test]
        fn depth_formula_matches(n in 3usize..9, d in 1usize..5, packed in any::<bool>()) {
            let code = toric(n);
            let v = if packed { Variant::Packed } else { Variant::Modular };
            let circ = gen_circuit(&code, d, v).unwrap();
            prop_assert_eq!(circuit_depth(&circ), expected_depth(2, 2, d, v));
        }
    }
}
