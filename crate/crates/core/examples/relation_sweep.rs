//! Draw random states in several dimensions and fit Bell value against concurrence.
//! Each dimension gives a line through the origin with slope 2√2(d−1).
//!
//! Usage: cargo run --release --example relation_sweep -- [states_per_dimension]

use qudit_slk::relation_slope;
use qudit_slk::report::{fit_line, relation_rows};

fn main() -> qudit_slk::Result<()> {
    let count = std::env::args().nth(1).map_or(200, |a| a.parse().expect("count must be an integer"));
    let dims: Vec<usize> = (2..=12).collect();
    let rows = relation_rows(&dims, count, 0)?;

    println!("{:>3} {:>14} {:>14} {:>12} {:>12}", "d", "slope", "2√2(d−1)", "intercept", "max |res|");
    for &d in &dims {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.d == d).map(|r| (r.concurrence, r.i_slk)).collect();
        let (slope, intercept) = fit_line(&pts);
        let worst = rows.iter().filter(|r| r.d == d).map(|r| r.residual.abs()).fold(0.0, f64::max);
        println!("{d:>3} {slope:>14.9} {:>14.9} {intercept:>12.2e} {worst:>12.2e}", relation_slope(d)?);
    }
    Ok(())
}
