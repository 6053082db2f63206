//! Fits `p̃ = p^{d/2} exp(α + βp + γp²)` to a simulated toric-code sweep and
//! compares the fitted curve with the data.
//!
//! ```text
//! cargo run --release --example fit_heuristic
//! ```

use cyclic_hgp::circuit::Variant;
use cyclic_hgp::cli::resolve_code;
use cyclic_hgp::decoder::DecoderConfig;
use cyclic_hgp::estimate::{fit_heuristic, heuristic_rate, run_memory_experiment};
use cyclic_hgp::noise::{Basis, MemoryExperiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = 3;
    let code = resolve_code("toric-3")?;
    let exp = MemoryExperiment::new(Basis::Z, Variant::Packed, d);
    let decoder = DecoderConfig {
        max_iter: 100,
        ..Default::default()
    };
    let mut points = Vec::new();
    for (i, p) in [1e-3, 2e-3, 3e-3, 5e-3, 8e-3].into_iter().enumerate() {
        points.push(run_memory_experiment(&code, &exp, p, 20_000, i as u64, &decoder)?);
    }
    let samples: Vec<_> = points.iter().filter(|pt| pt.failures > 0).map(|pt| pt.to_sample()).collect();
    let fit = fit_heuristic(&samples, d)?;
    println!("alpha {:.3}  beta {:.1}  gamma {:.0}", fit.alpha, fit.beta, fit.gamma);
    for pt in &points {
        println!(
            "p {:.0e}: measured {:.3e}, fitted {:.3e}",
            pt.p,
            pt.p_log_round,
            heuristic_rate(pt.p, &fit)
        );
    }
    Ok(())
}
