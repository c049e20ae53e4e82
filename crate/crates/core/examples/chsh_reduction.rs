//! For qubits the functional is the CHSH expression. Compare it with an explicit
//! ±1-observable computation on the same Bloch-plane settings.
//!
//! Usage: cargo run --example chsh_reduction

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use qudit_slk::{lr_bound, probability_table, slk_from_probabilities, PhaseOffsets, SchmidtState};

/// ⟨(cos θ X + sin θ Y) ⊗ (cos φ X + sin φ Y)⟩ for c0|00⟩ + c1|11⟩.
fn correlator(c0: f64, c1: f64, theta: f64, phi: f64) -> f64 {
    2.0 * c0 * c1 * (theta + phi).cos()
}

fn main() -> qudit_slk::Result<()> {
    println!("local bound at d = 2: {}", lr_bound(2)?);
    for c0 in [1.0, 0.9, 0.8, FRAC_1_SQRT_2] {
        let c1 = (1.0 - c0 * c0).sqrt();
        let state = SchmidtState::new(2, vec![c0, c1])?;
        let slk = slk_from_probabilities(&probability_table(&state, &PhaseOffsets::CANONICAL)).value;

        // With ω = −1 outcome 0 of each basis is (|0⟩ + e^{iπx}|1⟩)/√2 for offset x, so
        // the correlator depends on δ + ε only.
        let o = PhaseOffsets::CANONICAL;
        let (t1, t2) = (PI * o.delta1, PI * o.delta2);
        let (p1, p2) = (PI * o.epsilon1, PI * o.epsilon2);
        let e = |t, p| correlator(c0, c1, t, p);
        let chsh = e(t1, p1) + e(t1, p2) + e(t2, p2) - e(t2, p1);

        println!("c0 = {c0:.6}  SLK = {slk:.12}  CHSH = {chsh:.12}  4√2·c0c1 = {:.12}", 4.0 * 2f64.sqrt() * c0 * c1);
    }
    Ok(())
}
