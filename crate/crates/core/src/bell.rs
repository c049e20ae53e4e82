//! The Son–Lee–Kim Bell functional, its local-realistic bound, and violation checks.
//!
//! Two evaluation routes are provided. The probability route weights the four
//! outcome-difference events by `f(α)`; the correlation route sums phase-weighted
//! correlation moments and adds the complex conjugate. They agree for every state and
//! offset choice, which the tests use to pin the outcome-value convention.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{
    difference_distribution, omega_pow, CorrelationSpectrum, Direction, PhaseOffsets,
    ProbabilityTable, Setting,
};
use crate::numfmt;

/// Imaginary residue above which a correlation spectrum is rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

/// Weights `f(α) = (cot[(π/d)(α+1/4)] − 1)/√2` for `α = 0..d−1`. They sum to zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellWeights {
    d: usize,
    #[serde(serialize_with = "numfmt::ser_f64_slice")]
    f: Vec<f64>,
}

impl BellWeights {
    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        let f = (0..d)
            .map(|alpha| (cot(PI / d as f64 * (alpha as f64 + 0.25)) - 1.0) * FRAC_1_SQRT_2)
            .collect();
        Ok(Self { d, f })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn sum(&self) -> f64 {
        self.f.iter().sum()
    }
}

pub fn bell_weights(d: usize) -> Result<BellWeights> {
    BellWeights::new(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationPath {
    Probability,
    Correlation,
}

/// A Bell-SLK value together with the bound it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellResult {
    pub d: usize,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub value: f64,
    pub path: EvaluationPath,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub lr_bound: f64,
    pub violated: bool,
    pub offsets: Option<PhaseOffsets>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_digest: Option<String>,
}

impl BellResult {
    fn new(
        d: usize,
        value: f64,
        path: EvaluationPath,
        offsets: Option<PhaseOffsets>,
        state_digest: Option<String>,
    ) -> Self {
        let lr_bound = lr_bound(d).expect("dimension already validated");
        Self { d, value, path, lr_bound, violated: value > lr_bound, offsets, state_digest }
    }
}

/// Raw probability-route sum, without bound bookkeeping.
pub(crate) fn slk_value(table: &ProbabilityTable, weights: &BellWeights) -> f64 {
    use Setting::{One, Two};
    let d = table.dim();
    let a1b1 = difference_distribution(table, One, One, Direction::AMinusB);
    let b1a2 = difference_distribution(table, Two, One, Direction::BMinusA);
    let a2b2 = difference_distribution(table, Two, Two, Direction::AMinusB);
    let b2a1 = difference_distribution(table, One, Two, Direction::BMinusA);
    weights
        .values()
        .iter()
        .enumerate()
        .map(|(alpha, f)| f * (a1b1[alpha] + b1a2[(alpha + 1) % d] + a2b2[alpha] + b2a1[alpha]))
        .sum()
}

/// `Σ_α f(α)[P(A₁=B₁+α) + P(B₁=A₂+α+1) + P(A₂=B₂+α) + P(B₂=A₁+α)]`, sums modulo `d`.
pub fn slk_from_probabilities(table: &ProbabilityTable) -> BellResult {
    let weights = BellWeights::new(table.dim()).expect("tables have d >= 2");
    BellResult::new(
        table.dim(),
        slk_value(table, &weights),
        EvaluationPath::Probability,
        table.offsets().copied(),
        table.state_digest().map(str::to_owned),
    )
}

/// `(1/√2) Σ_{n=1}^{d−1} (ω^{−n/4}C¹¹ + ω^{−3n/4}C²¹ + ω^{n/4}C¹² + ω^{−n/4}C²²) + c.c.`
///
/// The conjugate half is assembled from the mirrored moments `C^{d−n}`, so a spectrum
/// that is not conjugate-symmetric leaves an imaginary residue and is rejected.
pub fn slk_from_correlations(spectrum: &CorrelationSpectrum) -> Result<BellResult> {
    use Setting::{One, Two};
    let d = spectrum.dim();
    let c = |a, b, n| spectrum.get(a, b, n);
    let mut direct = Complex64::new(0.0, 0.0);
    let mut mirrored = Complex64::new(0.0, 0.0);
    for n in 1..d {
        let x = n as f64;
        let (w1, w3) = (omega_pow(-x / 4.0, d), omega_pow(-3.0 * x / 4.0, d));
        direct += w1 * c(One, One, n) + w3 * c(Two, One, n) + w1.conj() * c(One, Two, n)
            + w1 * c(Two, Two, n);
        let m = d - n;
        mirrored += w1.conj() * c(One, One, m) + w3.conj() * c(Two, One, m)
            + w1 * c(One, Two, m)
            + w1.conj() * c(Two, Two, m);
    }
    let total = (direct + mirrored) * FRAC_1_SQRT_2;
    if total.im.abs() > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitianSpectrum(total.im));
    }
    Ok(BellResult::new(d, total.re, EvaluationPath::Correlation, None, None))
}

/// Local-realistic maximum `(3cot(π/4d) − cot(3π/4d))/√2 − 2√2`.
pub fn lr_bound(d: usize) -> Result<f64> {
    check_dim(d)?;
    let d = d as f64;
    Ok((3.0 * cot(PI / (4.0 * d)) - cot(3.0 * PI / (4.0 * d))) * FRAC_1_SQRT_2 - 2.0 * SQRT_2)
}

/// Concurrence above which canonical settings violate the bound: `lr_bound(d)/(2√2(d−1))`.
pub fn violation_threshold(d: usize) -> Result<f64> {
    Ok(lr_bound(d)? / relation_slope(d)?)
}

/// Slope `2√2(d−1)` of the Bell value against concurrence at canonical settings.
pub fn relation_slope(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(2.0 * SQRT_2 * (d - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{correlation_spectrum, probability_table};
    use crate::state::SchmidtState;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn canonical(s: &SchmidtState) -> ProbabilityTable {
        probability_table(s, &PhaseOffsets::CANONICAL)
    }

    #[test]
    fn weights_examples() {
        let w = bell_weights(2).unwrap();
        assert_abs_diff_eq!(w.values()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.values()[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bell_weights(3).unwrap().sum(), 0.0, epsilon = 1e-12);
        // (cot(π/16) − 1)/√2 with cot(π/16) = 1 + √2 + √(4 + 2√2)
        let cot_pi_16 = 1.0 + SQRT_2 + (4.0 + 2.0 * SQRT_2).sqrt();
        assert_abs_diff_eq!(bell_weights(4).unwrap().values()[0], (cot_pi_16 - 1.0) / SQRT_2, epsilon = 1e-13);
        assert_abs_diff_eq!(bell_weights(4).unwrap().values()[0], 2.8477590650225735, epsilon = 1e-12);
        assert!(matches!(bell_weights(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn weights_sum_to_zero() {
        for d in 2..=100 {
            assert_abs_diff_eq!(bell_weights(d).unwrap().sum(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(lr_bound(2).unwrap(), 2.0, epsilon = 1e-12);
        // cot(π/12) = 2 + √3, cot(π/4) = 1
        let want = (3.0 * (2.0 + 3f64.sqrt()) - 1.0) / SQRT_2 - 2.0 * SQRT_2;
        assert_abs_diff_eq!(lr_bound(3).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(lr_bound(3).unwrap(), 4.381341395361314, epsilon = 1e-12);
        for d in 2..50 {
            assert!(lr_bound(d + 1).unwrap() > lr_bound(d).unwrap());
        }
        assert!(lr_bound(0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(violation_threshold(2).unwrap(), FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(violation_threshold(3).unwrap(), 4.381341395361314 / (4.0 * SQRT_2), epsilon = 1e-12);
        for d in 2..=12 {
            let t = violation_threshold(d).unwrap();
            assert!(t > 0.0 && t < 1.0, "d={d} t={t}");
        }
    }

    #[test]
    fn functional_examples() {
        let me2 = SchmidtState::maximally_entangled(2).unwrap();
        let r = slk_from_probabilities(&canonical(&me2));
        assert_abs_diff_eq!(r.value, 2.0 * SQRT_2, epsilon = 1e-12);
        assert!(r.violated);
        assert_eq!(r.path, EvaluationPath::Probability);
        assert_eq!(r.offsets, Some(PhaseOffsets::CANONICAL));

        let me3 = SchmidtState::maximally_entangled(3).unwrap();
        assert_abs_diff_eq!(slk_from_probabilities(&canonical(&me3)).value, 4.0 * SQRT_2, epsilon = 1e-12);

        for d in 2..=12 {
            let p = SchmidtState::product(d, 0).unwrap();
            let r = slk_from_probabilities(&canonical(&p));
            assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
            assert!(!r.violated);
            let rc = slk_from_correlations(&correlation_spectrum(&canonical(&p))).unwrap();
            assert_abs_diff_eq!(rc.value, 0.0, epsilon = 1e-10);
        }

        let rc = slk_from_correlations(&correlation_spectrum(&canonical(&me2))).unwrap();
        assert_abs_diff_eq!(rc.value, 2.0 * SQRT_2, epsilon = 1e-10);
        assert_eq!(rc.path, EvaluationPath::Correlation);
    }

    #[test]
    fn random_qudit_paths_agree() {
        let s = SchmidtState::random(4, 99).unwrap();
        let t = canonical(&s);
        let p = slk_from_probabilities(&t).value;
        let c = slk_from_correlations(&correlation_spectrum(&t)).unwrap().value;
        assert_abs_diff_eq!(p, c, epsilon = 1e-9);
    }

    #[test]
    fn asymmetric_spectrum_rejected() {
        let s = SchmidtState::maximally_entangled(3).unwrap();
        let spectrum = correlation_spectrum(&canonical(&s));
        let mut values: [Vec<Complex64>; 4] = std::array::from_fn(|i| {
            let (a, b) = crate::measurement::SETTING_PAIRS[i];
            spectrum.row(a, b).to_vec()
        });
        values[0][1] += Complex64::new(0.0, 0.1);
        let broken = CorrelationSpectrum::from_values(3, values).unwrap();
        assert!(matches!(slk_from_correlations(&broken), Err(Error::NonHermitianSpectrum(_))));
    }

    #[test]
    fn classification_is_strict() {
        let s = SchmidtState::maximally_entangled(2).unwrap();
        let bound = lr_bound(2).unwrap();
        let r = BellResult::new(2, bound, EvaluationPath::Probability, None, None);
        assert!(!r.violated);
        let r = BellResult::new(2, bound + 1e-15, EvaluationPath::Probability, None, None);
        assert!(r.violated);
        let r2 = slk_from_probabilities(&canonical(&s));
        assert_eq!(r2.violated, r2.value > r2.lr_bound);
    }

    #[test]
    fn result_json_fields() {
        let s = SchmidtState::maximally_entangled(2).unwrap();
        let r = slk_from_probabilities(&canonical(&s));
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        for key in ["d", "value", "path", "lr_bound", "violated", "offsets"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["path"], "probability");
    }

    proptest! {
        #[test]
        fn paths_agree_at_any_offsets(seed in any::<u64>(), d in 2usize..8, off in proptest::array::uniform4(-2.0f64..2.0)) {
            let s = SchmidtState::random(d, seed).unwrap();
            let t = probability_table(&s, &PhaseOffsets::from_array(off).unwrap());
            let p = slk_from_probabilities(&t).value;
            let c = slk_from_correlations(&correlation_spectrum(&t)).unwrap().value;
            prop_assert!((p - c).abs() < 1e-9, "{} vs {}", p, c);
        }

        #[test]
        fn canonical_value_is_permutation_invariant(seed in any::<u64>(), d in 2usize..8, rot in 1usize..7) {
            let s = SchmidtState::random(d, seed).unwrap();
            let mut c = s.coeffs().to_vec();
            c.rotate_right(rot % d);
            c.reverse();
            let t = SchmidtState::new(d, c).unwrap();
            let x = slk_from_probabilities(&canonical(&s)).value;
            let y = slk_from_probabilities(&canonical(&t)).value;
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
