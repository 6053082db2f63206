//! Builds the named C2 and CxR codes from their cyclic seeds and checks
//! that the stabilizers commute and the X and Z sides balance.
//!
//! ```text
//! cargo run --release --example build_codes
//! ```

use cyclic_hgp::cli::BUILTIN_CODES;
use cyclic_hgp::cxc::{balance_report, build_c2, build_cxc, build_cxr, code_params, Family};
use cyclic_hgp::cyclic::classical_params;
use cyclic_hgp::gf2::CyclicPoly;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:<14} {:<4} {:<12} {:>5} {:>3} {:>8}",
        "code", "fam", "seed", "rank", "ω", "balanced"
    );
    for &(label, family, n, support) in BUILTIN_CODES {
        let seed = CyclicPoly::new(n, support.to_vec())?;
        let code = match family {
            Family::C2 => build_c2(&seed)?,
            Family::CxR => build_cxr(&seed)?,
            Family::CxC => build_cxc(&seed, &seed)?,
        };
        let params = code_params(&code)?;
        let classical = classical_params(&seed)?;
        assert_eq!(params.label(), label);
        assert!(code.hx.matmul(&code.hz.transpose())?.is_zero());
        let balance = balance_report(&code);
        println!(
            "{:<14} {:<4} {:<12} {:>5} {:>3} {:>8}",
            label,
            family.to_string(),
            format!("[{},{},{}]", classical.n, classical.k, classical.d),
            params.stabilizer_rank,
            params.omega,
            balance.is_balanced()
        );
    }

    // the toric code is the CxC product of two repetition codes
    let rep = CyclicPoly::repetition(5)?;
    println!("toric: {}", code_params(&build_cxc(&rep, &rep)?)?.label());
    Ok(())
}
