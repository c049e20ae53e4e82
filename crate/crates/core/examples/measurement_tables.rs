//! Build the joint probability table of a state, derive difference distributions and the
//! correlation spectrum, and write the table to JSON and CSV.
//!
//! Usage: cargo run --example measurement_tables -- [output_dir]

use std::path::PathBuf;

use qudit_slk::measurement::SETTING_PAIRS;
use qudit_slk::{
    correlation_spectrum, difference_distribution, probability_table, Direction, PhaseOffsets,
    SchmidtState,
};

fn main() -> qudit_slk::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let state = SchmidtState::new(3, vec![0.7, 0.6, 0.4])?;
    let table = probability_table(&state, &PhaseOffsets::CANONICAL);
    let spectrum = correlation_spectrum(&table);

    for (a, b) in SETTING_PAIRS {
        println!("A{} B{}", a.number(), b.number());
        for k in 0..3 {
            let row: Vec<String> = (0..3).map(|l| format!("{:.6}", table.get(a, b, k, l))).collect();
            println!("  k={k}: {}", row.join("  "));
        }
        let diff = difference_distribution(&table, a, b, Direction::BMinusA);
        println!("  P(l − k = α): {:?}", diff.iter().map(|p| (p * 1e6).round() / 1e6).collect::<Vec<_>>());
        for n in 1..3 {
            let c = spectrum.get(a, b, n);
            println!("  C^{n} = {:+.6} {:+.6}i", c.re, c.im);
        }
    }

    let json = dir.join("table.json");
    let csv = dir.join("table.csv");
    std::fs::write(&json, table.to_json()?)?;
    table.write_csv(std::fs::File::create(&csv)?)?;
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}
