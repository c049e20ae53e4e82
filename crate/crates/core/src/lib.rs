//! Evaluation of the Son–Lee–Kim (SLK) Bell functional for pure two-qudit states in
//! Schmidt form, measured in Fourier-type bases.
//!
//! At the canonical phase offsets the functional is linear in the concurrence,
//! `I_SLK = 2√2(d−1)·C`, so a Bell test doubles as an entanglement measurement.
//! The crate covers:
//!
//! - [`state`]: Schmidt-form states and concurrence.
//! - [`measurement`]: measurement bases, joint probability tables, difference
//!   distributions and correlation spectra.
//! - [`bell`]: the functional by two independent routes, the local-realistic bound
//!   and the violation threshold.
//! - [`identities`]: numerical checks of the trigonometric sums behind the relation.
//! - [`sampling`]: finite-shot experiments with visibility noise and bootstrap errors.
//! - [`optimize`]: search over phase offsets for larger Bell values.
//! - [`report`]: the command layer behind the `slk` binary.

pub mod bell;
pub mod error;
pub mod identities;
pub mod measurement;
pub mod numfmt;
pub mod optimize;
pub mod report;
pub mod sampling;
pub mod state;

pub use bell::{
    bell_weights, lr_bound, relation_slope, slk_from_correlations, slk_from_probabilities,
    violation_threshold, BellResult, BellWeights, EvaluationPath,
};
pub use error::{Error, Result};
pub use measurement::{
    correlation_spectrum, difference_distribution, eigenvector, joint_probability,
    probability_table, CorrelationSpectrum, Direction, PhaseOffsets, ProbabilityTable, Setting,
    Side,
};
pub use state::{Concurrence, SchmidtState};
