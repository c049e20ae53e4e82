//! Evaluate the Bell functional of a Schmidt state by both routes and compare it with
//! the local-realistic bound.
//!
//! Usage: cargo run --example evaluate_state -- [c0 c1 ...]

use qudit_slk::{
    correlation_spectrum, probability_table, relation_slope, slk_from_correlations,
    slk_from_probabilities, violation_threshold, PhaseOffsets, SchmidtState,
};

fn main() -> qudit_slk::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("coefficients must be numbers"))
        .collect();
    let state = if args.is_empty() {
        SchmidtState::new(3, vec![0.8, 0.5, 0.33])?
    } else {
        SchmidtState::new(args.len(), args)?
    };
    let d = state.dim();
    if state.was_rescaled() {
        println!("input was not normalized; rescaled to unit norm");
    }

    let table = probability_table(&state, &PhaseOffsets::CANONICAL);
    let p = slk_from_probabilities(&table);
    let c = slk_from_correlations(&correlation_spectrum(&table))?;
    let conc = state.concurrence().value();

    println!("d = {d}, coefficients = {:?}", state.coeffs());
    println!("I (probabilities)  = {:.12}", p.value);
    println!("I (correlations)   = {:.12}", c.value);
    println!("2√2(d−1)·C         = {:.12}", relation_slope(d)? * conc);
    println!("concurrence        = {conc:.12}");
    println!("local bound        = {:.12}", p.lr_bound);
    println!("violation needs C  > {:.12}", violation_threshold(d)?);
    println!("violated           = {}", p.violated);
    Ok(())
}
