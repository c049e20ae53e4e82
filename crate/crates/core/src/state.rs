//! Pure bipartite qudit states in Schmidt form, `Σ c_i |ii⟩`, and their concurrence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;

/// Tolerance on `Σ c_i² = 1`.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A pure two-qudit state with real non-negative Schmidt coefficients.
///
/// Coefficient order is part of the state's identity; nothing is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct SchmidtState {
    coeffs: Vec<f64>,
    rescaled: bool,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    d: usize,
    #[serde(serialize_with = "numfmt::ser_f64_slice")]
    coeffs: Vec<f64>,
}

impl TryFrom<StateRepr> for SchmidtState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        SchmidtState::new(r.d, r.coeffs)
    }
}

impl From<SchmidtState> for StateRepr {
    fn from(s: SchmidtState) -> Self {
        StateRepr { d: s.dim(), coeffs: s.coeffs }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

fn validate(d: usize, coeffs: &[f64]) -> Result<f64> {
    check_dim(d)?;
    if coeffs.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: coeffs.len() });
    }
    for (index, &value) in coeffs.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteCoefficient { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeCoefficient { index, value });
        }
    }
    let norm_sq: f64 = coeffs.iter().map(|c| c * c).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(norm_sq)
}

impl SchmidtState {
    /// Builds a state, rescaling the coefficients to unit norm when needed.
    ///
    /// [`was_rescaled`](Self::was_rescaled) reports whether rescaling happened.
    pub fn new(d: usize, coeffs: Vec<f64>) -> Result<Self> {
        let norm_sq = validate(d, &coeffs)?;
        if (norm_sq - 1.0).abs() <= NORM_TOLERANCE {
            return Ok(Self { coeffs, rescaled: false });
        }
        let norm = norm_sq.sqrt();
        let coeffs = coeffs.into_iter().map(|c| c / norm).collect();
        Ok(Self { coeffs, rescaled: true })
    }

    /// Like [`new`](Self::new) but rejects input that is not already normalized.
    pub fn new_strict(d: usize, coeffs: Vec<f64>) -> Result<Self> {
        let norm_sq = validate(d, &coeffs)?;
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { coeffs, rescaled: false })
    }

    /// All coefficients equal to `1/√d`.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        check_dim(d)?;
        let c = 1.0 / (d as f64).sqrt();
        Ok(Self { coeffs: vec![c; d], rescaled: false })
    }

    /// The product state `|ii⟩` for the given index.
    pub fn product(d: usize, index: usize) -> Result<Self> {
        check_dim(d)?;
        if index >= d {
            return Err(Error::LabelOutOfRange { label: index, d });
        }
        let mut coeffs = vec![0.0; d];
        coeffs[index] = 1.0;
        Ok(Self { coeffs, rescaled: false })
    }

    /// Draws a state whose squared coefficients are uniform on the probability simplex.
    ///
    /// Uses ChaCha8 seeded from `seed` and normalized unit exponentials, so the
    /// result depends only on `(d, seed)`.
    pub fn random(d: usize, seed: u64) -> Result<Self> {
        check_dim(d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = weights.iter().sum();
        let coeffs: Vec<f64> = weights.iter().map(|w| (w / total).sqrt()).collect();
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c / norm).collect(),
            rescaled: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn was_rescaled(&self) -> bool {
        self.rescaled
    }

    /// `Σ_{p>q} c_p c_q`.
    pub fn pair_sum(&self) -> f64 {
        let c = &self.coeffs;
        let mut sum = 0.0;
        for p in 1..c.len() {
            for q in 0..p {
                sum += c[p] * c[q];
            }
        }
        sum
    }

    pub fn concurrence(&self) -> Concurrence {
        let d = self.dim() as f64;
        Concurrence((2.0 / (d - 1.0) * self.pair_sum()).min(1.0))
    }

    /// Short stable fingerprint of the coefficients, for provenance records.
    pub fn digest(&self) -> String {
        // FNV-1a over the little-endian bit patterns.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for c in &self.coeffs {
            for byte in c.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

/// Concurrence `(2/(d−1)) Σ_{p>q} c_p c_q`, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Concurrence(#[serde(serialize_with = "numfmt::ser_f64")] f64);

impl Concurrence {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Concurrence> for f64 {
    fn from(c: Concurrence) -> f64 {
        c.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalizes_equal_weights() {
        let s = SchmidtState::new(2, vec![1.0, 1.0]).unwrap();
        assert!(s.was_rescaled());
        for &c in s.coeffs() {
            assert_abs_diff_eq!(c, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn keeps_normalized_product() {
        let s = SchmidtState::new(3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(!s.was_rescaled());
        assert_eq!(s.coeffs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn three_four_five() {
        let s = SchmidtState::new(2, vec![3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.coeffs()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeffs()[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            SchmidtState::new(2, vec![1.0, -0.1]),
            Err(Error::NegativeCoefficient { index: 1, .. })
        ));
        assert!(matches!(SchmidtState::new(3, vec![0.0; 3]), Err(Error::ZeroVector)));
        assert!(matches!(
            SchmidtState::new(3, vec![1.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(SchmidtState::new(1, vec![1.0]), Err(Error::InvalidDimension(1))));
        assert!(matches!(
            SchmidtState::new(2, vec![f64::NAN, 1.0]),
            Err(Error::NonFiniteCoefficient { index: 0 })
        ));
        assert!(matches!(SchmidtState::maximally_entangled(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(SchmidtState::random(0, 1), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn strict_mode_rejects_unnormalized() {
        assert!(matches!(
            SchmidtState::new_strict(2, vec![3.0, 4.0]),
            Err(Error::NotNormalized(_))
        ));
        assert!(SchmidtState::new_strict(2, vec![0.6, 0.8]).is_ok());
    }

    #[test]
    fn maximally_entangled_coefficients() {
        for d in 2..=4 {
            let s = SchmidtState::maximally_entangled(d).unwrap();
            for &c in s.coeffs() {
                assert_abs_diff_eq!(c, 1.0 / (d as f64).sqrt(), epsilon = 1e-15);
            }
        }
        assert_eq!(SchmidtState::maximally_entangled(4).unwrap().coeffs(), &[0.5; 4]);
    }

    #[test]
    fn concurrence_examples() {
        for d in 2..=12 {
            let me = SchmidtState::maximally_entangled(d).unwrap();
            assert_abs_diff_eq!(me.concurrence().value(), 1.0, epsilon = 1e-14);
            assert_eq!(SchmidtState::product(d, d - 1).unwrap().concurrence().value(), 0.0);
        }
        let s = SchmidtState::new(2, vec![0.6, 0.8]).unwrap();
        assert_abs_diff_eq!(s.concurrence().value(), 0.96, epsilon = 1e-15);
    }

    #[test]
    fn random_is_deterministic_and_normalized() {
        assert_eq!(SchmidtState::random(3, 42).unwrap(), SchmidtState::random(3, 42).unwrap());
        assert_ne!(SchmidtState::random(3, 42).unwrap(), SchmidtState::random(3, 43).unwrap());
        let s = SchmidtState::random(5, 7).unwrap();
        let n: f64 = s.coeffs().iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_qubit_concurrence_covers_unit_interval() {
        let (mut lo, mut hi) = (1.0f64, 0.0f64);
        for seed in 0..10_000 {
            let c = SchmidtState::random(2, seed).unwrap().concurrence().value();
            assert!(c > 0.0 && c < 1.0);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        assert!(lo < 0.05, "min {lo}");
        assert!(hi > 0.95, "max {hi}");
    }

    #[test]
    fn random_concurrence_in_range() {
        for d in 2..=12 {
            for seed in 0..1000 {
                let c = SchmidtState::random(d, seed).unwrap().concurrence().value();
                assert!((0.0..=1.0).contains(&c), "d={d} seed={seed} c={c}");
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = SchmidtState::new(2, vec![0.6, 0.8]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"d":2,"coeffs":[5.9999999999999998e-1,8.0000000000000004e-1]}"#);
        let back: SchmidtState = serde_json::from_str(&text).unwrap();
        assert_eq!(back.coeffs(), s.coeffs());
        assert!(serde_json::from_str::<SchmidtState>(r#"{"d":2,"coeffs":[-1,1]}"#).is_err());
    }

    proptest! {
        #[test]
        fn concurrence_is_permutation_invariant(seed in any::<u64>(), d in 2usize..9, rot in 0usize..8) {
            let s = SchmidtState::random(d, seed).unwrap();
            let mut c = s.coeffs().to_vec();
            c.rotate_left(rot % d);
            c.swap(0, d - 1);
            let t = SchmidtState::new(d, c).unwrap();
            prop_assert!((s.concurrence().value() - t.concurrence().value()).abs() < 1e-14);
        }

        #[test]
        fn qubit_concurrence_is_twice_product(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a + b > 1e-6);
            let s = SchmidtState::new(2, vec![a, b]).unwrap();
            let c = s.coeffs();
            prop_assert_eq!(s.concurrence().value(), (2.0 * c[0] * c[1]).min(1.0));
        }
    }
}
