//! Check the trigonometric identities in double precision over the default grid, then
//! repeat a few in extended precision.
//!
//! Usage: cargo run --release --example identity_sweep

use qudit_slk::identities::{self, Checker, Precision, SweepGrid};

fn main() -> qudit_slk::Result<()> {
    let rows = identities::sweep(&SweepGrid::default())?;
    let mut worst: std::collections::BTreeMap<&str, (f64, usize, usize)> = Default::default();
    for row in &rows {
        let entry = worst.entry(row.identity().name()).or_insert((0.0, 0, 0));
        match row {
            identities::SweepOutcome::Checked(r) => {
                entry.0 = entry.0.max(r.abs_error / r.tolerance);
                entry.1 += 1;
            }
            identities::SweepOutcome::Skipped { .. } => entry.2 += 1,
        }
    }
    println!("{:<22} {:>8} {:>8} {:>18}", "identity", "checked", "skipped", "max error/tol");
    for (name, (ratio, checked, skipped)) in &worst {
        println!("{name:<22} {checked:>8} {skipped:>8} {ratio:>18.3e}");
    }
    let failed = rows.iter().filter(|r| r.failed()).count();
    println!("failures: {failed}");

    let fine = Checker::new(Precision::Extended { digits: 50 });
    for report in [fine.theorem1(17, 5, 0.3)?, fine.theorem2(17, 5, 0.3)?, fine.cot_cosine_sum(64, 7)?] {
        println!("{} at 50 digits: |lhs − rhs| = {:.3e}", report.identity, report.abs_error);
    }
    Ok(())
}
