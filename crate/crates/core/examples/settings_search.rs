//! Search measurement phase offsets for a larger Bell value than the canonical settings give.
//!
//! Usage: cargo run --release --example settings_search -- [budget]

use qudit_slk::optimize::optimize;
use qudit_slk::SchmidtState;

fn main() -> qudit_slk::Result<()> {
    let budget = std::env::args().nth(1).map_or(20_000, |a| a.parse().expect("budget must be an integer"));
    let states = [
        SchmidtState::new(2, vec![0.6, 0.8])?,
        SchmidtState::maximally_entangled(3)?,
        SchmidtState::new(3, vec![0.9, 0.4, 0.1])?,
        SchmidtState::random(4, 11)?,
        SchmidtState::product(3, 0)?,
    ];
    for state in &states {
        let r = optimize(state, budget, 0)?;
        println!(
            "d={} C={:.4}  canonical {:.9}  best {:.9}  gain {:.2e}  offsets {:?}  ({} evaluations)",
            state.dim(),
            state.concurrence().value(),
            r.canonical_value,
            r.best_value,
            r.improvement,
            r.best_offsets.to_array().map(|x| (x * 1e4).round() / 1e4),
            r.evaluations,
        );
    }
    Ok(())
}
