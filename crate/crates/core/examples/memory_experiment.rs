//! Noisy memory experiment on the distance-5 toric code: sample detector
//! outcomes from the circuit, decode with BP+OSD and report per-round
//! logical error rates against the surface-code heuristic.
//!
//! ```text
//! cargo run --release --example memory_experiment
//! ```

use cyclic_hgp::circuit::Variant;
use cyclic_hgp::cli::resolve_code;
use cyclic_hgp::decoder::DecoderConfig;
use cyclic_hgp::estimate::{simulate_memory, surface_heuristic};
use cyclic_hgp::noise::{Basis, MemoryExperiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let code = resolve_code("toric-5")?;
    let exp = MemoryExperiment::new(Basis::Z, Variant::Packed, 5);
    let decoder = DecoderConfig {
        max_iter: 100,
        ..Default::default()
    };
    println!(
        "{:>7} {:>6} {:>9} {:>10} {:>23} {:>10}",
        "p", "shots", "failures", "p_L/round", "95% CI", "heuristic"
    );
    for (i, p) in [1e-3, 2e-3, 4e-3].into_iter().enumerate() {
        let (point, batch) = simulate_memory(&code, &exp, p, 10_000, 100 + i as u64, &decoder)?;
        println!(
            "{p:>7.0e} {:>6} {:>9} {:>10.3e} [{:>9.3e}, {:>9.3e}] {:>10.3e}   BP converged {}",
            point.shots,
            point.failures,
            point.p_log_round,
            point.ci_lo,
            point.ci_hi,
            surface_heuristic(p, 5),
            batch.bp_converged
        );
    }
    Ok(())
}
