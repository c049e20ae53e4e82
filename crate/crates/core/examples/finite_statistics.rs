//! Simulate finite-shot Bell experiments and watch the error bar shrink as 1/√N, with
//! white noise pulling the expected value down linearly in the visibility.
//!
//! Usage: cargo run --release --example finite_statistics

use qudit_slk::sampling::{estimate_slk, plug_in_slk, simulate_counts, ExperimentPlan};
use qudit_slk::{lr_bound, SchmidtState};

fn main() -> qudit_slk::Result<()> {
    let d = 3;
    let state = SchmidtState::maximally_entangled(d)?;
    println!("local bound for d = {d}: {:.6}", lr_bound(d)?);
    println!("{:>9} {:>6} {:>12} {:>10} {:>12} {:>7}", "shots", "v", "estimate", "std err", "exact", "z");
    for visibility in [1.0, 0.85, 0.7] {
        for shots in [1_000u64, 10_000, 100_000, 1_000_000] {
            let plan = ExperimentPlan::new(state.clone(), shots, 7).with_visibility(visibility);
            let exact = plug_in_slk(&plan.sampling_table()?);
            let est = estimate_slk(&simulate_counts(&plan)?)?;
            let z = (est.value - exact) / est.std_error;
            println!(
                "{shots:>9} {visibility:>6.2} {:>12.6} {:>10.2e} {exact:>12.6} {z:>7.2}",
                est.value, est.std_error
            );
        }
    }
    Ok(())
}
