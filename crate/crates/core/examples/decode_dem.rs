//! Extracts the detector error model of a noisy [[240,8,8]] memory circuit,
//! samples it and decodes a handful of shots one by one.
//!
//! ```text
//! cargo run --release --example decode_dem -- 0.002
//! ```

use cyclic_hgp::circuit::Variant;
use cyclic_hgp::cli::resolve_code;
use cyclic_hgp::decoder::{BpOsdDecoder, DecoderConfig};
use cyclic_hgp::gf2::BitVec;
use cyclic_hgp::noise::{annotate_noise, build_memory_experiment, extract_dem, sample_dem, Basis, MemoryExperiment, NoiseModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = std::env::args().nth(1).map_or(Ok(2e-3), |s| s.parse())?;
    let code = resolve_code("[[240,8,8]]")?;
    let clean = build_memory_experiment(&code, &MemoryExperiment::new(Basis::Z, Variant::Packed, 4))?;
    let noisy = annotate_noise(&clean, &NoiseModel::new(p)?);
    let dem = extract_dem(&noisy);
    println!(
        "{} detectors, {} observables, {} faults from {} fault locations",
        dem.num_detectors,
        dem.num_observables,
        dem.num_faults(),
        noisy.fault_locations()
    );

    let config = DecoderConfig {
        max_iter: 100,
        ..Default::default()
    };
    let decoder = BpOsdDecoder::from_dem(&dem, config)?;
    let shots = sample_dem(&dem, 10, 7);
    for s in 0..shots.shots() {
        let syndrome = shots.detectors.row(s);
        let res = decoder.decode(&syndrome)?;
        let mut predicted = BitVec::zeros(dem.num_observables);
        for j in res.correction.ones() {
            dem.faults[j].observables.iter().for_each(|&o| predicted.flip(o as usize));
        }
        let actual = shots.observables.row(s);
        println!(
            "shot {s}: {:>2} detection events, BP {} after {:>3} iterations, OSD {}, logical {}",
            syndrome.weight(),
            if res.converged { "converged" } else { "stalled" },
            res.iterations,
            res.used_osd,
            if predicted == actual { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
