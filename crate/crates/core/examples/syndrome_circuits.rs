//! Modular and packed syndrome-extraction circuits for a CxR code: depth,
//! layer packing and the first few layers of the text form.
//!
//! ```text
//! cargo run --release --example syndrome_circuits -- 8
//! ```

use cyclic_hgp::circuit::{circuit_depth, emit_text, gen_circuit, packing_report, verify_detector_map, Variant};
use cyclic_hgp::cli::resolve_code;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rounds = std::env::args().nth(1).map_or(Ok(8), |s| s.parse())?;
    let code = resolve_code("[[240,8,8]]")?;

    for variant in [Variant::Modular, Variant::Packed] {
        let circuit = gen_circuit(&code, rounds, variant)?;
        let packing = packing_report(&circuit);
        println!(
            "{variant}: {} layers, depth {}, {} full / {} boundary gate layers",
            circuit.layers.len(),
            circuit_depth(&circuit),
            packing.full_layers,
            packing.boundary_layers
        );
    }

    let small = gen_circuit(&code, 3, Variant::Packed)?;
    let map = verify_detector_map(&code, &small);
    println!(
        "detector map: {} faults at {} points, {} mismatches",
        map.faults_checked,
        map.injection_points,
        map.mismatches.len()
    );

    for line in emit_text(&small).lines().take(4) {
        let cut = line.char_indices().nth(100).map_or(line.len(), |(i, _)| i);
        println!("  {}", &line[..cut]);
    }
    Ok(())
}
