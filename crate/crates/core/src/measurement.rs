//! Fourier-type measurement bases, exact joint-outcome tables, outcome-difference
//! distributions and correlation spectra.
//!
//! Alice's eigenvector for label `k` and setting `a` is `(1/√d) Σ_j ω^{(k+δ_a)j} |j⟩`,
//! Bob's for label `l` and setting `b` is `(1/√d) Σ_j ω^{(−l+ε_b)j} |j⟩`, with
//! `ω = exp(2πi/d)`. Offsets are real and enter only through `ω^{x·j}`, so each one
//! is periodic with period `d`, and the amplitudes depend on `δ_a + ε_b` only.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::{self, sig17};
use crate::state::SchmidtState;

/// Entries this far below zero are rounding noise and get clamped.
pub const NEGATIVE_CLAMP: f64 = 1e-14;
/// Per-block normalization tolerance.
pub const BLOCK_SUM_TOLERANCE: f64 = 1e-12;

/// `ω^x = exp(2πi·x/d)` for real `x`.
pub fn omega_pow(x: f64, d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x / d as f64)
}

/// `ω^n` for integer `n`, reduced modulo `d` before the trig call.
pub fn omega_int(n: i64, d: usize) -> Complex64 {
    omega_pow(n.rem_euclid(d as i64) as f64, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// One of the two observables each party can choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    One,
    Two,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::One, Setting::Two];

    /// 1 or 2.
    pub fn number(self) -> usize {
        match self {
            Setting::One => 1,
            Setting::Two => 2,
        }
    }

    pub fn index(self) -> usize {
        self.number() - 1
    }

    pub fn from_number(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Setting::One),
            2 => Ok(Setting::Two),
            _ => Err(Error::ParameterOutOfRange(format!("setting must be 1 or 2, got {n}"))),
        }
    }
}

/// The four setting pairs in storage order: (1,1), (1,2), (2,1), (2,2).
pub const SETTING_PAIRS: [(Setting, Setting); 4] = [
    (Setting::One, Setting::One),
    (Setting::One, Setting::Two),
    (Setting::Two, Setting::One),
    (Setting::Two, Setting::Two),
];

fn pair_index(a: Setting, b: Setting) -> usize {
    2 * a.index() + b.index()
}

fn pair_key(a: Setting, b: Setting) -> String {
    format!("{},{}", a.number(), b.number())
}

/// Measurement phase parameters `(δ₁, δ₂, ε₁, ε₂)` in units of the `ω` exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOffsets {
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub delta1: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub delta2: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub epsilon1: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub epsilon2: f64,
}

impl PhaseOffsets {
    /// `(0, 1/2, 1/4, −1/4)`.
    pub const CANONICAL: PhaseOffsets = PhaseOffsets {
        delta1: 0.0,
        delta2: 0.5,
        epsilon1: 0.25,
        epsilon2: -0.25,
    };

    pub fn new(delta1: f64, delta2: f64, epsilon1: f64, epsilon2: f64) -> Result<Self> {
        Self::from_array([delta1, delta2, epsilon1, epsilon2])
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteOffset);
        }
        Ok(Self { delta1: v[0], delta2: v[1], epsilon1: v[2], epsilon2: v[3] })
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.delta1, self.delta2, self.epsilon1, self.epsilon2]
    }

    pub fn delta(self, a: Setting) -> f64 {
        match a {
            Setting::One => self.delta1,
            Setting::Two => self.delta2,
        }
    }

    pub fn epsilon(self, b: Setting) -> f64 {
        match b {
            Setting::One => self.epsilon1,
            Setting::Two => self.epsilon2,
        }
    }

    /// Offsets reduced into `[0, d)`, the period of each parameter at dimension `d`.
    pub fn reduced(self, d: usize) -> [f64; 4] {
        self.to_array().map(|x| x.rem_euclid(d as f64))
    }

    /// Whether both offset sets produce identical measurement bases and labels at
    /// dimension `d`, comparing each parameter modulo `d` within `tol`.
    pub fn equivalent(&self, other: &PhaseOffsets, d: usize, tol: f64) -> bool {
        let period = d as f64;
        self.to_array().iter().zip(other.to_array()).all(|(x, y)| {
            let diff = (x - y).rem_euclid(period);
            diff.min(period - diff) <= tol
        })
    }
}

impl Default for PhaseOffsets {
    fn default() -> Self {
        Self::CANONICAL
    }
}

fn check_label(label: usize, d: usize) -> Result<()> {
    if label >= d {
        return Err(Error::LabelOutOfRange { label, d });
    }
    Ok(())
}

/// Amplitudes of the eigenvector with the given label, on the computational basis.
pub fn eigenvector(
    side: Side,
    setting: Setting,
    label: usize,
    d: usize,
    offsets: &PhaseOffsets,
) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_label(label, d)?;
    let (int_part, frac) = match side {
        Side::A => (label as i64, offsets.delta(setting)),
        Side::B => (-(label as i64), offsets.epsilon(setting)),
    };
    let norm = 1.0 / (d as f64).sqrt();
    Ok((0..d as i64)
        .map(|j| {
            let exponent = (int_part * j).rem_euclid(d as i64) as f64 + frac * j as f64;
            omega_pow(exponent, d) * norm
        })
        .collect())
}

fn amplitude(coeffs: &[f64], alice: &[Complex64], bob: &[Complex64]) -> Complex64 {
    coeffs
        .iter()
        .zip(alice.iter().zip(bob))
        .map(|(&c, (ea, eb))| (ea * eb).conj() * c)
        .sum()
}

/// `|⟨k|_{A,a} ⟨l|_{B,b} |ψ⟩|²`.
pub fn joint_probability(
    state: &SchmidtState,
    a: Setting,
    b: Setting,
    k: usize,
    l: usize,
    offsets: &PhaseOffsets,
) -> Result<f64> {
    let d = state.dim();
    let alice = eigenvector(Side::A, a, k, d, offsets)?;
    let bob = eigenvector(Side::B, b, l, d, offsets)?;
    Ok(amplitude(state.coeffs(), &alice, &bob).norm_sqr())
}

/// Joint outcome probabilities `P_{a,b}(k, l)` for all four setting pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    d: usize,
    // Row-major d×d blocks in SETTING_PAIRS order, indexed [k * d + l].
    blocks: [Vec<f64>; 4],
    offsets: Option<PhaseOffsets>,
    state_digest: Option<String>,
}

impl ProbabilityTable {
    /// Validates and wraps raw blocks (in [`SETTING_PAIRS`] order).
    ///
    /// Entries down to `−1e−14` are clamped to zero; anything lower is an error, as is
    /// a block that does not sum to one.
    pub fn from_blocks(d: usize, mut blocks: [Vec<f64>; 4]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        for (idx, block) in blocks.iter_mut().enumerate() {
            let (a, b) = SETTING_PAIRS[idx];
            if block.len() != d * d {
                return Err(Error::DimensionMismatch { expected: d * d, got: block.len() });
            }
            for (i, p) in block.iter_mut().enumerate() {
                if !p.is_finite() || *p < -NEGATIVE_CLAMP {
                    return Err(Error::NegativeProbability {
                        a: a.number(),
                        b: b.number(),
                        k: i / d,
                        l: i % d,
                        value: *p,
                    });
                }
                if *p < 0.0 {
                    *p = 0.0;
                }
            }
            let sum: f64 = block.iter().sum();
            if (sum - 1.0).abs() > BLOCK_SUM_TOLERANCE {
                return Err(Error::UnnormalizedBlock { a: a.number(), b: b.number(), sum });
            }
        }
        Ok(Self { d, blocks, offsets: None, state_digest: None })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Offsets the table was computed with, when it came from a state.
    pub fn offsets(&self) -> Option<&PhaseOffsets> {
        self.offsets.as_ref()
    }

    pub fn state_digest(&self) -> Option<&str> {
        self.state_digest.as_deref()
    }

    pub fn block(&self, a: Setting, b: Setting) -> &[f64] {
        &self.blocks[pair_index(a, b)]
    }

    pub fn get(&self, a: Setting, b: Setting, k: usize, l: usize) -> f64 {
        self.block(a, b)[k * self.d + l]
    }

    /// `v·P + (1−v)/d²` on every block.
    pub fn with_visibility(&self, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::ParameterOutOfRange(format!(
                "visibility must lie in [0, 1], got {visibility}"
            )));
        }
        let noise = (1.0 - visibility) / (self.d * self.d) as f64;
        let mut out = self.clone();
        for block in out.blocks.iter_mut() {
            for p in block.iter_mut() {
                *p = visibility * *p + noise;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let blocks: BTreeMap<String, Vec<Vec<Box<serde_json::value::RawValue>>>> = SETTING_PAIRS
            .iter()
            .map(|&(a, b)| {
                let rows = self
                    .block(a, b)
                    .chunks(self.d)
                    .map(|row| {
                        row.iter()
                            .map(|&p| serde_json::value::RawValue::from_string(sig17(p)).unwrap())
                            .collect()
                    })
                    .collect();
                (pair_key(a, b), rows)
            })
            .collect();
        #[derive(Serialize)]
        struct Out {
            d: usize,
            blocks: BTreeMap<String, Vec<Vec<Box<serde_json::value::RawValue>>>>,
        }
        Ok(serde_json::to_string(&Out { d: self.d, blocks })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            d: usize,
            blocks: BTreeMap<String, Vec<Vec<f64>>>,
        }
        let repr: Repr = serde_json::from_str(text)?;
        let mut blocks: [Vec<f64>; 4] = Default::default();
        for (idx, &(a, b)) in SETTING_PAIRS.iter().enumerate() {
            let key = pair_key(a, b);
            let rows = repr
                .blocks
                .get(&key)
                .ok_or_else(|| Error::Malformed(format!("missing block {key}")))?;
            if rows.len() != repr.d || rows.iter().any(|r| r.len() != repr.d) {
                return Err(Error::Malformed(format!("block {key} is not {0}x{0}", repr.d)));
            }
            blocks[idx] = rows.concat();
        }
        if repr.blocks.len() != 4 {
            return Err(Error::Malformed("expected exactly four blocks".into()));
        }
        Self::from_blocks(repr.d, blocks)
    }

    /// CSV with header `a,b,k,l,p`, one row per entry.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["a", "b", "k", "l", "p"])?;
        for &(a, b) in &SETTING_PAIRS {
            for k in 0..self.d {
                for l in 0..self.d {
                    out.write_record([
                        a.number().to_string(),
                        b.number().to_string(),
                        k.to_string(),
                        l.to_string(),
                        sig17(self.get(a, b, k, l)),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the `a,b,k,l,p` CSV layout. Every cell must appear exactly once.
    pub fn read_csv<R: Read>(r: R, d: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            a: usize,
            b: usize,
            k: usize,
            l: usize,
            p: f64,
        }
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mut blocks: [Vec<f64>; 4] = std::array::from_fn(|_| vec![f64::NAN; d * d]);
        let mut rdr = csv::Reader::from_reader(r);
        for row in rdr.deserialize() {
            let row: Row = row?;
            let (a, b) = (Setting::from_number(row.a)?, Setting::from_number(row.b)?);
            check_label(row.k, d)?;
            check_label(row.l, d)?;
            let slot = &mut blocks[pair_index(a, b)][row.k * d + row.l];
            if !slot.is_nan() {
                return Err(Error::Malformed(format!(
                    "duplicate entry ({},{},{},{})",
                    row.a, row.b, row.k, row.l
                )));
            }
            *slot = row.p;
        }
        if blocks.iter().flatten().any(|p| p.is_nan()) {
            return Err(Error::Malformed("table has missing entries".into()));
        }
        Self::from_blocks(d, blocks)
    }
}

/// Exact table for a state at the given offsets, one inner product per entry.
pub fn probability_table(state: &SchmidtState, offsets: &PhaseOffsets) -> ProbabilityTable {
    let d = state.dim();
    let basis = |side, setting| -> Vec<Vec<Complex64>> {
        (0..d)
            .map(|label| eigenvector(side, setting, label, d, offsets).expect("label in range"))
            .collect()
    };
    let alice = [basis(Side::A, Setting::One), basis(Side::A, Setting::Two)];
    let bob = [basis(Side::B, Setting::One), basis(Side::B, Setting::Two)];
    let blocks = SETTING_PAIRS.map(|(a, b)| {
        let mut block = Vec::with_capacity(d * d);
        for ek in &alice[a.index()] {
            for el in &bob[b.index()] {
                block.push(amplitude(state.coeffs(), ek, el).norm_sqr());
            }
        }
        block
    });
    ProbabilityTable {
        d,
        blocks,
        offsets: Some(*offsets),
        state_digest: Some(state.digest()),
    }
}

/// Which party's label is taken minus the other's in a difference event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Entry `α` is `P(k = l + α mod d)`.
    AMinusB,
    /// Entry `α` is `P(l = k + α mod d)`.
    BMinusA,
}

/// Distribution of the outcome-label difference modulo `d` for one setting pair.
pub fn difference_distribution(
    table: &ProbabilityTable,
    a: Setting,
    b: Setting,
    direction: Direction,
) -> Vec<f64> {
    let d = table.dim();
    let block = table.block(a, b);
    let mut out = vec![0.0; d];
    for k in 0..d {
        for l in 0..d {
            let alpha = match direction {
                Direction::AMinusB => (k + d - l) % d,
                Direction::BMinusA => (l + d - k) % d,
            };
            out[alpha] += block[k * d + l];
        }
    }
    out
}

/// Correlations `C^n_{a,b} = ⟨A_a^n B_b^n⟩` for `n = 0..d−1`.
///
/// Alice's outcome for label `k` carries the value `ω^{−k}` and Bob's for label `l`
/// carries `ω^{l}`, so `C^n = Σ_{k,l} ω^{n(l−k)} P(k,l)`: the DFT of the B-minus-A
/// difference distribution. This is the assignment under which the correlation and
/// probability forms of the functional coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpectrum {
    d: usize,
    values: [Vec<Complex64>; 4],
}

impl CorrelationSpectrum {
    /// Wraps raw values (in [`SETTING_PAIRS`] order), each of length `d`.
    pub fn from_values(d: usize, values: [Vec<Complex64>; 4]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if let Some(v) = values.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        Ok(Self { d, values })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, a: Setting, b: Setting, n: usize) -> Complex64 {
        self.values[pair_index(a, b)][n % self.d]
    }

    pub fn row(&self, a: Setting, b: Setting) -> &[Complex64] {
        &self.values[pair_index(a, b)]
    }

    /// Inverse DFT of one row, giving back the B-minus-A difference distribution.
    pub fn difference_distribution(&self, a: Setting, b: Setting) -> Vec<f64> {
        let d = self.d;
        let row = self.row(a, b);
        (0..d)
            .map(|alpha| {
                let s: Complex64 = (0..d)
                    .map(|n| row[n] * omega_int(-((n * alpha) as i64), d))
                    .sum();
                s.re / d as f64
            })
            .collect()
    }
}

pub fn correlation_spectrum(table: &ProbabilityTable) -> CorrelationSpectrum {
    let d = table.dim();
    let values = SETTING_PAIRS.map(|(a, b)| {
        let diff = difference_distribution(table, a, b, Direction::BMinusA);
        (0..d)
            .map(|n| {
                diff.iter()
                    .enumerate()
                    .map(|(alpha, &p)| omega_int((n * alpha) as i64, d) * p)
                    .sum()
            })
            .collect()
    });
    CorrelationSpectrum { d, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const ALL_LABELS: [(Setting, Setting); 4] = SETTING_PAIRS;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigenvector_examples() {
        let can = PhaseOffsets::CANONICAL;
        for d in 2..=6 {
            let v = eigenvector(Side::A, Setting::One, 0, d, &can).unwrap();
            for z in v {
                assert_abs_diff_eq!(z.re, 1.0 / (d as f64).sqrt(), epsilon = 1e-15);
                assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
            }
        }
        let h = 1.0 / 2f64.sqrt();
        let v = eigenvector(Side::A, Setting::One, 1, 2, &can).unwrap();
        assert_abs_diff_eq!((v[0] - c(h, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((v[1] - c(-h, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let v = eigenvector(Side::B, Setting::One, 0, 2, &can).unwrap();
        let e = Complex64::from_polar(h, PI / 4.0);
        assert_abs_diff_eq!((v[0] - c(h, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((v[1] - e).norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(
            eigenvector(Side::B, Setting::Two, 3, 3, &can),
            Err(Error::LabelOutOfRange { label: 3, d: 3 })
        ));
    }

    #[test]
    fn bases_are_orthonormal() {
        let off = PhaseOffsets::new(0.13, -0.7, 1.9, 0.31).unwrap();
        for d in 2..=7 {
            for side in [Side::A, Side::B] {
                for s in Setting::ALL {
                    for i in 0..d {
                        let u = eigenvector(side, s, i, d, &off).unwrap();
                        for j in 0..d {
                            let v = eigenvector(side, s, j, d, &off).unwrap();
                            let ip: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                            let want = if i == j { 1.0 } else { 0.0 };
                            assert_abs_diff_eq!((ip - c(want, 0.0)).norm(), 0.0, epsilon = 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_state_entries() {
        for d in 2..=5 {
            let s = SchmidtState::product(d, 0).unwrap();
            let t = probability_table(&s, &PhaseOffsets::CANONICAL);
            for &(a, b) in &ALL_LABELS {
                for &p in t.block(a, b) {
                    assert_abs_diff_eq!(p, 1.0 / (d * d) as f64, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn qubit_maximally_entangled_entry() {
        let s = SchmidtState::maximally_entangled(2).unwrap();
        let p = joint_probability(&s, Setting::One, Setting::One, 0, 0, &PhaseOffsets::CANONICAL)
            .unwrap();
        assert_abs_diff_eq!(p, (2.0 + 2f64.sqrt()) / 8.0, epsilon = 1e-15);
        let t = probability_table(&s, &PhaseOffsets::CANONICAL);
        let diff = difference_distribution(&t, Setting::One, Setting::One, Direction::AMinusB);
        let cos2 = (PI / 8.0).cos().powi(2);
        assert_abs_diff_eq!(diff[0], cos2, epsilon = 1e-15);
        assert_abs_diff_eq!(diff[1], 1.0 - cos2, epsilon = 1e-15);
    }

    #[test]
    fn maximally_entangled_marginals_are_uniform() {
        let s = SchmidtState::maximally_entangled(3).unwrap();
        let t = probability_table(&s, &PhaseOffsets::CANONICAL);
        for &(a, b) in &ALL_LABELS {
            let block = t.block(a, b);
            for i in 0..3 {
                let row: f64 = (0..3).map(|l| block[i * 3 + l]).sum();
                let col: f64 = (0..3).map(|k| block[k * 3 + i]).sum();
                assert_abs_diff_eq!(row, 1.0 / 3.0, epsilon = 1e-12);
                assert_abs_diff_eq!(col, 1.0 / 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_difference_probability() {
        // (1/d) Σ_{p,q} c_p c_q cos((2π/d)(α+1/4)(p−q)) at canonical offsets.
        for d in 2..=8 {
            for seed in 0..20 {
                let s = SchmidtState::random(d, seed).unwrap();
                let t = probability_table(&s, &PhaseOffsets::CANONICAL);
                let diff = difference_distribution(&t, Setting::One, Setting::One, Direction::AMinusB);
                let cs = s.coeffs();
                for (alpha, &got) in diff.iter().enumerate() {
                    let mut want = 0.0;
                    for p in 0..d {
                        for q in 0..d {
                            let x = 2.0 * PI / d as f64 * (alpha as f64 + 0.25) * (p as f64 - q as f64);
                            want += cs[p] * cs[q] * x.cos();
                        }
                    }
                    assert_abs_diff_eq!(got, want / d as f64, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = SchmidtState::maximally_entangled(2).unwrap();
        let spectrum = correlation_spectrum(&probability_table(&s, &PhaseOffsets::CANONICAL));
        assert_abs_diff_eq!(spectrum.get(Setting::One, Setting::One, 0).re, 1.0, epsilon = 1e-12);
        let c1 = spectrum.get(Setting::One, Setting::One, 1);
        assert_abs_diff_eq!(c1.re, 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c1.im, 0.0, epsilon = 1e-12);

        for d in 2..=6 {
            let p = SchmidtState::product(d, 1).unwrap();
            let spectrum = correlation_spectrum(&probability_table(&p, &PhaseOffsets::CANONICAL));
            for &(a, b) in &ALL_LABELS {
                assert_abs_diff_eq!((spectrum.get(a, b, 0) - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
                for n in 1..d {
                    assert_abs_diff_eq!(spectrum.get(a, b, n).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_difference_is_uniform() {
        let s = SchmidtState::product(4, 2).unwrap();
        let t = probability_table(&s, &PhaseOffsets::new(0.3, 0.1, -2.0, 0.9).unwrap());
        for &(a, b) in &ALL_LABELS {
            for dir in [Direction::AMinusB, Direction::BMinusA] {
                for p in difference_distribution(&t, a, b, dir) {
                    assert_abs_diff_eq!(p, 0.25, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn uniform_integer_shift_permutes_bob_labels() {
        // Adding n to every offset moves the amplitude exponent by −2n: P(k,l) → P(k,l−2n).
        let s = SchmidtState::random(5, 3).unwrap();
        let base = PhaseOffsets::new(0.1, 0.37, 0.2, -0.6).unwrap();
        let t0 = probability_table(&s, &base);
        for n in 1..=3i64 {
            let sh = base.to_array().map(|x| x + n as f64);
            let t1 = probability_table(&s, &PhaseOffsets::from_array(sh).unwrap());
            for &(a, b) in &ALL_LABELS {
                for k in 0..5 {
                    for l in 0..5 {
                        let src = (l as i64 - 2 * n).rem_euclid(5) as usize;
                        assert_abs_diff_eq!(t1.get(a, b, k, l), t0.get(a, b, k, src), epsilon = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn table_errors_and_clamping() {
        let mut blocks: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.25; 4]);
        blocks[0] = vec![0.5 + 5e-15, 0.5, -5e-15, 0.0];
        let t = ProbabilityTable::from_blocks(2, blocks.clone()).unwrap();
        assert_eq!(t.get(Setting::One, Setting::One, 1, 0), 0.0);
        blocks[0] = vec![0.6, 0.5, -0.1, 0.0];
        assert!(matches!(
            ProbabilityTable::from_blocks(2, blocks.clone()),
            Err(Error::NegativeProbability { a: 1, b: 1, k: 1, l: 0, .. })
        ));
        blocks[0] = vec![0.3, 0.3, 0.3, 0.0];
        assert!(matches!(
            ProbabilityTable::from_blocks(2, blocks),
            Err(Error::UnnormalizedBlock { a: 1, b: 1, .. })
        ));
    }

    #[test]
    fn json_and_csv_round_trip() {
        let s = SchmidtState::random(3, 11).unwrap();
        let t = probability_table(&s, &PhaseOffsets::CANONICAL);
        let json = t.to_json().unwrap();
        assert!(json.starts_with(r#"{"d":3,"blocks":{"1,1":[["#));
        let back = ProbabilityTable::from_json(&json).unwrap();
        assert_eq!(back.block(Setting::Two, Setting::One), t.block(Setting::Two, Setting::One));

        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a,b,k,l,p\n1,1,0,0,"));
        assert_eq!(text.lines().count(), 1 + 4 * 9);
        let back = ProbabilityTable::read_csv(buf.as_slice(), 3).unwrap();
        assert_eq!(back.block(Setting::Two, Setting::Two), t.block(Setting::Two, Setting::Two));

        let truncated: String = text.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(ProbabilityTable::read_csv(truncated.as_bytes(), 3).is_err());
    }

    #[test]
    fn offsets_equivalence_is_modulo_dimension() {
        let a = PhaseOffsets::CANONICAL;
        let b = PhaseOffsets::new(3.0, 0.5, 0.25 - 3.0, 2.75).unwrap();
        assert!(a.equivalent(&b, 3, 1e-12));
        assert!(!a.equivalent(&b, 2, 1e-12));
        assert!(PhaseOffsets::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn table_invariants(seed in any::<u64>(), d in 2usize..9, off in proptest::array::uniform4(-3.0f64..3.0)) {
            let s = SchmidtState::random(d, seed).unwrap();
            let t = probability_table(&s, &PhaseOffsets::from_array(off).unwrap());
            for &(a, b) in &ALL_LABELS {
                let block = t.block(a, b);
                prop_assert!(block.iter().all(|p| (0.0..=1.0).contains(p)));
                prop_assert!((block.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for dir in [Direction::AMinusB, Direction::BMinusA] {
                    let diff = difference_distribution(&t, a, b, dir);
                    prop_assert!((diff.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn spectrum_invariants_and_round_trip(seed in any::<u64>(), d in 2usize..9, off in proptest::array::uniform4(-3.0f64..3.0)) {
            let s = SchmidtState::random(d, seed).unwrap();
            let t = probability_table(&s, &PhaseOffsets::from_array(off).unwrap());
            let spectrum = correlation_spectrum(&t);
            for &(a, b) in &ALL_LABELS {
                prop_assert!((spectrum.get(a, b, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                for n in 0..d {
                    prop_assert!(spectrum.get(a, b, n).norm() <= 1.0 + 1e-12);
                    prop_assert!((spectrum.get(a, b, d - n) - spectrum.get(a, b, n).conj()).norm() < 1e-12);
                }
                let back = spectrum.difference_distribution(a, b);
                let diff = difference_distribution(&t, a, b, Direction::BMinusA);
                for (x, y) in back.iter().zip(&diff) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn gauge_and_period_invariance(seed in any::<u64>(), d in 2usize..8, shift in -2.5f64..2.5, which in 0usize..4) {
            let s = SchmidtState::random(d, seed).unwrap();
            let base = PhaseOffsets::new(0.1, 0.37, 0.2, -0.6).unwrap();
            let t0 = probability_table(&s, &base);
            let g = PhaseOffsets::new(0.1 + shift, 0.37 + shift, 0.2 - shift, -0.6 - shift).unwrap();
            let mut p = base.to_array();
            p[which] += d as f64;
            let tp = probability_table(&s, &PhaseOffsets::from_array(p).unwrap());
            let tg = probability_table(&s, &g);
            for &(a, b) in &ALL_LABELS {
                for (i, &x) in t0.block(a, b).iter().enumerate() {
                    prop_assert!((tg.block(a, b)[i] - x).abs() < 1e-12);
                    prop_assert!((tp.block(a, b)[i] - x).abs() < 1e-12);
                }
            }
        }
    }
}
