use super::*;
use crate::circuit::{CheckType, Variant};
use crate::cxc::{build_cxc, build_cxr, CxcCode};
use crate::gf2::CyclicPoly;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn toric(d: usize) -> CxcCode {
    let p = CyclicPoly::new(d, vec![0, 1]).unwrap();
    build_cxc(&p, &p).unwrap()
}

fn cxr_240() -> CxcCode {
    build_cxr(&CyclicPoly::new(15, vec![0, 1, 4]).unwrap()).unwrap()
}

fn exp(basis: Basis, variant: Variant, rounds: usize) -> MemoryExperiment {
    MemoryExperiment {
        detectors: DetectorSet::Both,
        ..MemoryExperiment::new(basis, variant, rounds)
    }
}

fn all_variants() -> Vec<MemoryExperiment> {
    let mut v = Vec::new();
    for basis in [Basis::Z, Basis::X] {
        for variant in [Variant::Modular, Variant::Packed] {
            for detectors in [DetectorSet::MemoryBasis, DetectorSet::Both] {
                v.push(MemoryExperiment {
                    detectors,
                    ..exp(basis, variant, 3)
                });
            }
        }
    }
    v
}

#[test]
fn noiseless_samples_are_zero() {
    let code = toric(3);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 3)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(0.0).unwrap());
    assert_eq!(noisy, circ);
    let batch = pauli_frame_sample(&noisy, 500, 1);
    assert!(batch.detectors.is_zero() && batch.observables.is_zero());
    assert_eq!(extract_dem(&noisy).num_faults(), 0);
}

#[test]
fn detectors_are_deterministic_under_gauge_randomization() {
    let opts = SampleOptions {
        chunk: 256,
        randomize_gauge: true,
    };
    for code in [toric(3), cxr_240()] {
        for e in all_variants() {
            let circ = build_memory_experiment(&code, &e).unwrap();
            let batch = pauli_frame_sample_with(&circ, 256, 9, &opts);
            assert!(batch.detectors.is_zero(), "{e:?}");
            assert!(batch.observables.is_zero(), "{e:?}");
        }
    }
}

#[test]
fn gauge_randomization_exposes_random_outcomes() {
    // a detector on a first-round X check would be random in Z-memory
    let code = toric(3);
    let mut circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 2)).unwrap();
    circ.detectors.push(vec![0]);
    let opts = SampleOptions {
        chunk: 512,
        randomize_gauge: true,
    };
    let batch = pauli_frame_sample_with(&circ, 512, 3, &opts);
    let last = circ.detectors.len() - 1;
    let fired = (0..512).filter(|&s| batch.detectors.bit(s, last)).count();
    assert!((150..362).contains(&fired), "{fired}");
}

#[test]
fn detector_count_closed_form() {
    for code in [toric(2), toric(3), cxr_240()] {
        for d in [1, 2, 4] {
            for set in [DetectorSet::MemoryBasis, DetectorSet::Both] {
                let e = MemoryExperiment {
                    detectors: set,
                    ..exp(Basis::Z, Variant::Modular, d)
                };
                let circ = build_memory_experiment(&code, &e).unwrap();
                assert_eq!(circ.num_detectors(), expected_detector_count(code.a(), code.b(), d, set));
            }
            let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Modular, d)).unwrap();
            assert_eq!(circ.num_observables(), 2 * if code.a() == 15 { 4 } else { 1 });
        }
    }
}

#[test]
fn toric_d1_fault_locations() {
    let code = toric(3);
    let (ab, n) = (9usize, 18usize);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Modular, 1)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(1e-3).unwrap());
    // Modular d=1: prep, 2 A-shifts, 2 A-gates, 2 B-shifts, 2 B-gates, MR_X(X),
    // 2 A-shifts, 2 A-gates, MR_X(Z), data readout.
    let qubits = 4 * ab;
    let gates = 2 * 4 * ab;
    let resets = qubits;
    let flips = 2 * ab + n;
    let reset_after_measure = 2 * ab;
    let shift_idles = 6 * qubits;
    let first_a_idles = 2 * (qubits - 2 * ab);
    let b_idles = 0;
    let last_a_idles = 2 * (qubits - 2 * ab);
    let measure_idles = 2 * (qubits - ab) + (qubits - n);
    let expected = gates + resets + flips + reset_after_measure + shift_idles + first_a_idles + b_idles + last_a_idles + measure_idles;
    assert_eq!(noisy.fault_locations(), expected);
}

#[test]
fn packed_gate_steps_have_no_idle_qubits() {
    let code = cxr_240();
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 3)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(1e-3).unwrap());
    let mut step: Vec<&Op> = Vec::new();
    let mut full_steps = 0;
    for op in &noisy.ops {
        if matches!(op, Op::Tick) {
            let has_cx = step.iter().any(|o| matches!(o, Op::Cx(_)));
            let has_cz = step.iter().any(|o| matches!(o, Op::Cz(_)));
            if has_cx && has_cz {
                full_steps += 1;
                assert!(!step.iter().any(|o| matches!(o, Op::Depolarize1 { .. })));
            }
            step.clear();
        } else {
            step.push(op);
        }
    }
    assert!(full_steps > 0);
}

#[test]
fn single_data_fault_hits_column_once() {
    let code = cxr_240();
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 3)).unwrap();
    let first_tick = circ.ops.iter().position(|o| matches!(o, Op::Tick)).unwrap();
    for u in [0usize, 7, 131, 239] {
        let mut c = circ.clone();
        c.ops.insert(
            first_tick + 1,
            Op::XError {
                p: 0.01,
                targets: vec![u as u32],
            },
        );
        let dem = extract_dem(&c);
        assert_eq!(dem.num_faults(), 1);
        let expected: Vec<u32> = code.hz.column(u).ones().map(|r| r as u32).collect();
        assert_eq!(dem.faults[0].detectors, expected);
        assert_eq!(expected.len(), if u < 120 { 2 } else { 3 });
    }
}

#[test]
fn stabilizer_injection_is_silent() {
    let code = cxr_240();
    for basis in [Basis::Z, Basis::X] {
        let circ = build_memory_experiment(&code, &exp(basis, Variant::Modular, 3)).unwrap();
        // Rounds interleave, so the only cuts with no half-coupled ancilla are
        // right after preparation and right before the data readout.
        let ticks: Vec<usize> = circ
            .ops
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o, Op::Tick))
            .map(|(i, _)| i)
            .collect();
        for (at, row) in [(ticks[0] + 1, 0usize), (ticks[0] + 1, 50), (ticks[ticks.len() - 2] + 1, 7)] {
            for (h, is_x) in [(&code.hx, true), (&code.hz, false)] {
                let targets: Vec<u32> = h.row(row).ones().map(|u| u as u32).collect();
                let mut c = circ.clone();
                let op = if is_x {
                    Op::XError { p: 1.0, targets }
                } else {
                    Op::ZError { p: 1.0, targets }
                };
                c.ops.insert(at, op);
                let batch = pauli_frame_sample(&c, 64, 0);
                assert!(batch.detectors.is_zero() && batch.observables.is_zero());
            }
        }
    }
}

#[test]
fn sampling_is_deterministic_and_thread_independent() {
    let code = toric(3);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Modular, 3)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(5e-3).unwrap());
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| pauli_frame_sample(&noisy, 3000, 42))
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_ne!(a.detectors, pauli_frame_sample(&noisy, 3000, 43).detectors);
}

#[test]
fn frame_and_dem_sampling_agree() {
    let code = toric(2);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Modular, 2)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(1e-2).unwrap());
    let dem = extract_dem(&noisy);
    let shots = 100_000;
    let a = pauli_frame_sample(&noisy, shots, 5);
    let b = sample_dem(&dem, shots, 6);
    let rate = |m: &crate::gf2::BitMatrix, j: usize| (0..shots).filter(|&s| m.bit(s, j)).count() as f64 / shots as f64;
    for j in 0..dem.num_detectors {
        let (ra, rb) = (rate(&a.detectors, j), rate(&b.detectors, j));
        let sigma = (2.0 * rb.max(1e-4) * (1.0 - rb) / shots as f64).sqrt();
        assert!((ra - rb).abs() <= 3.5 * sigma, "detector {j}: {ra} vs {rb}");
    }
    for j in 0..dem.num_observables {
        let (ra, rb) = (rate(&a.observables, j), rate(&b.observables, j));
        let sigma = (2.0 * rb.max(1e-4) * (1.0 - rb) / shots as f64).sqrt();
        assert!((ra - rb).abs() <= 3.5 * sigma, "observable {j}: {ra} vs {rb}");
    }
}

#[test]
fn detector_rates_match_first_order_estimate() {
    let code = toric(3);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Modular, 3)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(1e-3).unwrap());
    let dem = extract_dem(&noisy);
    let mut predicted = vec![0.0; dem.num_detectors];
    for f in &dem.faults {
        for &d in &f.detectors {
            predicted[d as usize] += f.prob;
        }
    }
    let shots = 100_000;
    let batch = pauli_frame_sample(&noisy, shots, 11);
    for (j, &p) in predicted.iter().enumerate() {
        let fired = (0..shots).filter(|&s| batch.detectors.bit(s, j)).count() as f64 / shots as f64;
        assert!((fired - p).abs() <= 0.3 * p, "detector {j}: {fired} vs {p}");
    }
}

#[test]
fn dem_text_round_trip_and_merge_order() {
    let code = toric(2);
    let circ = build_memory_experiment(&code, &exp(Basis::X, Variant::Packed, 2)).unwrap();
    let dem = extract_dem(&annotate_noise(&circ, &NoiseModel::new(2e-3).unwrap()));
    assert!(dem.faults.iter().all(|f| f.prob > 0.0 && f.prob <= 0.5));
    let parsed = DetectorErrorModel::from_text(&dem.to_text()).unwrap();
    assert_eq!(parsed, dem);

    let mut entries: Vec<((Vec<u32>, Vec<u32>), f64)> = Vec::new();
    for (i, f) in dem.faults.iter().enumerate() {
        entries.push(((f.detectors.clone(), f.observables.clone()), f.prob / 2.0));
        entries.push(((f.detectors.clone(), f.observables.clone()), 0.001 * (i % 7) as f64));
    }
    entries.push(((vec![], vec![]), 0.2));
    let forward = dem::merge_faults(entries.clone());
    entries.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
    let shuffled = dem::merge_faults(entries);
    assert_eq!(forward.len(), dem.num_faults());
    for (a, b) in forward.iter().zip(&shuffled) {
        assert_eq!((&a.detectors, &a.observables), (&b.detectors, &b.observables));
        assert!((a.prob - b.prob).abs() < 1e-15);
    }
}

#[test]
fn memory_bases_mirror_each_other() {
    for code in [toric(3), cxr_240()] {
        for variant in [Variant::Modular, Variant::Packed] {
            let model = NoiseModel::new(1e-3).unwrap();
            let z = extract_dem(&annotate_noise(
                &build_memory_experiment(&code, &exp(Basis::Z, variant, 3)).unwrap(),
                &model,
            ));
            let x = extract_dem(&annotate_noise(
                &build_memory_experiment(&code, &exp(Basis::X, variant, 3)).unwrap(),
                &model,
            ));
            assert_eq!(z.num_detectors, x.num_detectors);
            assert_eq!(z.num_faults(), x.num_faults(), "{variant:?}");
        }
    }
}

#[test]
fn shot_batch_binary_round_trip() {
    let code = toric(3);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 2)).unwrap();
    let noisy = annotate_noise(&circ, &NoiseModel::new(2e-2).unwrap());
    let batch = pauli_frame_sample(&noisy, 77, 8);
    let bytes = batch.to_bytes();
    assert_eq!(&bytes[..4], b"SHB1");
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 77);
    assert_eq!(ShotBatch::from_bytes(&bytes, 8).unwrap(), batch);
    assert!(ShotBatch::from_bytes(&bytes[..20], 8).is_err());
}

#[test]
fn stim_export_lists_detectors() {
    let code = toric(2);
    let circ = build_memory_experiment(&code, &exp(Basis::Z, Variant::Packed, 2)).unwrap();
    let text = annotate_noise(&circ, &NoiseModel::new(1e-3).unwrap()).to_stim();
    assert_eq!(text.lines().filter(|l| l.starts_with("DETECTOR")).count(), circ.num_detectors());
    assert_eq!(text.lines().filter(|l| l.starts_with("OBSERVABLE_INCLUDE")).count(), 2);
    assert!(text.contains("DEPOLARIZE2(0.001)"));
    assert!(circ.detector_info.iter().any(|d| d.kind == CheckType::X));
}
