//! Exhaustive search over cyclic seeds, printing the best-rate tables.
//!
//! ```text
//! cargo run --example search_catalog -- 40
//! ```

use std::time::Instant;

use cyclic_hgp::cyclic::{enumerate_cyclic_codes, write_tables_csv, SearchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = std::env::args().nth(1).map_or(Ok(40), |s| s.parse())?;
    let cfg = SearchConfig {
        n_max,
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = enumerate_cyclic_codes(&cfg)?;
    println!(
        "evaluated {} canonical seeds in {:.1?}: {} survivors, {} skipped",
        out.evaluated,
        t0.elapsed(),
        out.survivors.len(),
        out.skipped.len()
    );
    write_tables_csv(&out.tables, std::io::stdout())?;
    Ok(())
}
