//! Numerical verification of the trigonometric sums behind the linear Bell/concurrence
//! relation.
//!
//! Every identity can be evaluated in double precision or, for regimes where cot
//! amplifies rounding near its poles, in extended precision with a configurable number
//! of decimal digits.

use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::io::Write;

use astro_float::{BigFloat, Consts, RoundingMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::bell_weights;
use crate::error::{Error, Result};
use crate::numfmt::sig17;

/// Inputs whose cot or cosec argument sits closer than this to a multiple of π are rejected.
pub const POLE_THRESHOLD: f64 = 1e-9;

pub const COSINE_SUM_TOLERANCE: f64 = 1e-10;
pub const HASSAN_TOLERANCE: f64 = 1e-9;
pub const WEIGHTS_TOLERANCE: f64 = 1e-10;
pub const RELATION_TOLERANCE: f64 = 1e-12;

/// Theorem tolerances scale with the number of summed terms: `1e−8·k`.
pub fn theorem_tolerance(k: usize) -> f64 {
    1e-8 * k as f64
}

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// One concrete instance of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "identity", rename_all = "snake_case")]
pub enum Identity {
    /// `Σ_α cos((2πm/d)(α+1/4)) = 0`.
    CosineSum { d: usize, m: usize },
    /// `Σ_α cos((2πm/d)(α+1/4)) cot((π/d)(α+1/4)) = d`.
    CotCosineSum { d: usize, m: usize },
    /// `Σ_j cos(2πaj/k) cot(πj/k + πb) = k cos(b(2a−k)π) cosec(bkπ)`.
    Theorem1 { k: usize, a: usize, b: f64 },
    /// `Σ_j sin(2πaj/k) cot(πj/k + πb) = −k sin(b(2a−k)π) cosec(bkπ)`.
    Theorem2 { k: usize, a: usize, b: f64 },
    /// `Σ_k (−1)^k cot((2k+1)π/4d) = d`.
    HassanAlternating { d: usize },
    /// `Σ_k cot((4k+1)π/4d) = d`.
    HassanShifted { d: usize },
    /// `Σ_α f(α) = 0`.
    WeightsZeroSum { d: usize },
    /// The coefficient of `Σ_{p>q} c_p c_q` assembled from the sums above equals `4√2`.
    RelationCoefficient { d: usize },
}

impl Identity {
    pub fn name(&self) -> &'static str {
        match self {
            Identity::CosineSum { .. } => "cosine_sum",
            Identity::CotCosineSum { .. } => "cot_cosine_sum",
            Identity::Theorem1 { .. } => "theorem1",
            Identity::Theorem2 { .. } => "theorem2",
            Identity::HassanAlternating { .. } => "hassan_alternating",
            Identity::HassanShifted { .. } => "hassan_shifted",
            Identity::WeightsZeroSum { .. } => "weights_zero_sum",
            Identity::RelationCoefficient { .. } => "relation_coefficient",
        }
    }

    /// `(d, m, k, a, b)` CSV cells; parameters an identity does not use are `None`.
    fn csv_params(&self) -> [Option<String>; 5] {
        let s = |x: usize| Some(x.to_string());
        match *self {
            Identity::CosineSum { d, m } | Identity::CotCosineSum { d, m } => [s(d), s(m), None, None, None],
            Identity::Theorem1 { k, a, b } | Identity::Theorem2 { k, a, b } => {
                [None, None, s(k), s(a), Some(sig17(b))]
            }
            Identity::HassanAlternating { d }
            | Identity::HassanShifted { d }
            | Identity::WeightsZeroSum { d }
            | Identity::RelationCoefficient { d } => [s(d), None, None, None, None],
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Identity::CosineSum { d, m } | Identity::CotCosineSum { d, m } => {
                write!(f, "{}(d={d}, m={m})", self.name())
            }
            Identity::Theorem1 { k, a, b } | Identity::Theorem2 { k, a, b } => {
                write!(f, "{}(k={k}, a={a}, b={b})", self.name())
            }
            Identity::HassanAlternating { d }
            | Identity::HassanShifted { d }
            | Identity::WeightsZeroSum { d }
            | Identity::RelationCoefficient { d } => write!(f, "{}(d={d})", self.name()),
        }
    }
}

/// Both sides of one identity instance and whether they agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(identity: Identity, lhs: f64, rhs: f64, abs_error: f64, tolerance: f64) -> Self {
        Self { identity, lhs, rhs, abs_error, tolerance, pass: abs_error <= tolerance }
    }
}

/// Arithmetic used to evaluate the sums.
///
/// Applies to the cosine sums, the theorems and the Hassan identities. The weight sum
/// and relation coefficient always check the double-precision values the Bell
/// evaluation actually uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    /// Arbitrary precision with at least this many significant decimal digits.
    Extended { digits: u32 },
}

trait Arith {
    type Num: Clone;
    fn int(&self, n: i64) -> Self::Num;
    fn real(&self, x: f64) -> Self::Num;
    fn pi(&self) -> Self::Num;
    fn add(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn sub(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn mul(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn div(&self, x: &Self::Num, y: &Self::Num) -> Self::Num;
    fn cos(&self, x: &Self::Num) -> Self::Num;
    fn sin(&self, x: &Self::Num) -> Self::Num;
    fn to_f64(&self, x: &Self::Num) -> Result<f64>;

    fn cot(&self, x: &Self::Num) -> Self::Num {
        self.div(&self.cos(x), &self.sin(x))
    }

    /// `π·num/den`.
    fn pi_frac(&self, num: i64, den: i64) -> Self::Num {
        self.div(&self.mul(&self.pi(), &self.int(num)), &self.int(den))
    }

    fn sum<I: Iterator<Item = Self::Num>>(&self, it: I) -> Self::Num {
        it.fold(self.int(0), |acc, x| self.add(&acc, &x))
    }
}

struct DoubleArith;

impl Arith for DoubleArith {
    type Num = f64;
    fn int(&self, n: i64) -> f64 {
        n as f64
    }
    fn real(&self, x: f64) -> f64 {
        x
    }
    fn pi(&self) -> f64 {
        PI
    }
    fn add(&self, x: &f64, y: &f64) -> f64 {
        x + y
    }
    fn sub(&self, x: &f64, y: &f64) -> f64 {
        x - y
    }
    fn mul(&self, x: &f64, y: &f64) -> f64 {
        x * y
    }
    fn div(&self, x: &f64, y: &f64) -> f64 {
        x / y
    }
    fn cos(&self, x: &f64) -> f64 {
        x.cos()
    }
    fn sin(&self, x: &f64) -> f64 {
        x.sin()
    }
    fn to_f64(&self, x: &f64) -> Result<f64> {
        Ok(*x)
    }
    // π·num/den rounds once instead of twice.
    fn pi_frac(&self, num: i64, den: i64) -> f64 {
        PI * (num as f64 / den as f64)
    }
}

struct ExtendedArith {
    bits: usize,
    consts: RefCell<Consts>,
}

const RM: RoundingMode = RoundingMode::ToEven;

impl ExtendedArith {
    fn new(digits: u32) -> Result<Self> {
        // log2(10) ≈ 3.3219 bits per digit, plus a guard word.
        let bits = (f64::from(digits.max(16)) * std::f64::consts::LOG2_10).ceil() as usize + 64;
        let consts = Consts::new().map_err(|e| Error::Precision(format!("{e:?}")))?;
        Ok(Self { bits, consts: RefCell::new(consts) })
    }
}

impl Arith for ExtendedArith {
    type Num = BigFloat;
    fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.bits)
    }
    fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }
    fn pi(&self) -> BigFloat {
        self.consts.borrow_mut().pi(self.bits, RM)
    }
    fn add(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.add(y, self.bits, RM)
    }
    fn sub(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.sub(y, self.bits, RM)
    }
    fn mul(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.mul(y, self.bits, RM)
    }
    fn div(&self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.div(y, self.bits, RM)
    }
    fn cos(&self, x: &BigFloat) -> BigFloat {
        x.cos(self.bits, RM, &mut self.consts.borrow_mut())
    }
    fn sin(&self, x: &BigFloat) -> BigFloat {
        x.sin(self.bits, RM, &mut self.consts.borrow_mut())
    }
    fn to_f64(&self, x: &BigFloat) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Precision(format!("{:?}", x.err())));
        }
        if x.is_zero() {
            return Ok(0.0);
        }
        let text = x
            .format(astro_float::Radix::Dec, RM, &mut self.consts.borrow_mut())
            .map_err(|e| Error::Precision(format!("{e:?}")))?;
        text.parse::<f64>()
            .map_err(|_| Error::Precision(format!("cannot read back {text}")))
    }
}

/// Distance, in argument space, from `π·r` to the nearest multiple of π.
fn pole_distance(r: f64) -> f64 {
    (r - r.round()).abs() * PI
}

fn check_pole(r: f64) -> Result<()> {
    if pole_distance(r) < POLE_THRESHOLD {
        return Err(Error::PoleProximity { argument: r * PI, threshold: POLE_THRESHOLD });
    }
    Ok(())
}

fn check_dm(d: usize, m: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if m == 0 || m >= d {
        return Err(Error::ParameterOutOfRange(format!("m must lie in 1..={}, got {m}", d - 1)));
    }
    Ok(())
}

fn check_theorem(k: usize, a: usize, b: f64) -> Result<()> {
    if a == 0 || a >= k {
        return Err(Error::ParameterOutOfRange(format!("need 0 < a < k, got a={a}, k={k}")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 0 < b < 1, got {b}")));
    }
    check_pole(b * k as f64)?;
    for j in 0..k {
        check_pole(j as f64 / k as f64 + b)?;
    }
    Ok(())
}

fn cosine_sum_in<A: Arith>(ar: &A, d: usize, m: usize) -> A::Num {
    let (d, m) = (d as i64, m as i64);
    // (2πm/d)(α+1/4) = π·m(4α+1)/(2d)
    ar.sum((0..d).map(|alpha| ar.cos(&ar.pi_frac(m * (4 * alpha + 1), 2 * d))))
}

fn cot_cosine_sum_in<A: Arith>(ar: &A, d: usize, m: usize) -> A::Num {
    let (d, m) = (d as i64, m as i64);
    ar.sum((0..d).map(|alpha| {
        let c = ar.cos(&ar.pi_frac(m * (4 * alpha + 1), 2 * d));
        ar.mul(&c, &ar.cot(&ar.pi_frac(4 * alpha + 1, 4 * d)))
    }))
}

/// `(lhs, rhs)` of either theorem; `sine` selects the second one.
fn theorem_in<A: Arith>(ar: &A, k: usize, a: usize, b: f64, sine: bool) -> (A::Num, A::Num) {
    let (ki, ai) = (k as i64, a as i64);
    let pi = ar.pi();
    let bb = ar.real(b);
    let lhs = ar.sum((0..ki).map(|j| {
        let phase = ar.pi_frac(2 * ai * j, ki);
        let weight = if sine { ar.sin(&phase) } else { ar.cos(&phase) };
        let arg = ar.add(&ar.pi_frac(j, ki), &ar.mul(&pi, &bb));
        ar.mul(&weight, &ar.cot(&arg))
    }));
    let outer = ar.mul(&ar.mul(&bb, &ar.int(2 * ai - ki)), &pi);
    let cosec = ar.div(&ar.int(1), &ar.sin(&ar.mul(&ar.mul(&bb, &ar.int(ki)), &pi)));
    let rhs = if sine {
        ar.mul(&ar.mul(&ar.int(-ki), &ar.sin(&outer)), &cosec)
    } else {
        ar.mul(&ar.mul(&ar.int(ki), &ar.cos(&outer)), &cosec)
    };
    (lhs, rhs)
}

fn hassan_in<A: Arith>(ar: &A, d: usize) -> (A::Num, A::Num) {
    let d = d as i64;
    let alternating = ar.sum((0..d).map(|k| {
        let t = ar.cot(&ar.pi_frac(2 * k + 1, 4 * d));
        if k % 2 == 0 { t } else { ar.sub(&ar.int(0), &t) }
    }));
    let shifted = ar.sum((0..d).map(|k| ar.cot(&ar.pi_frac(4 * k + 1, 4 * d))));
    (alternating, shifted)
}

/// Evaluates identities at a fixed [`Precision`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Checker {
    precision: Precision,
}

impl Checker {
    pub fn new(precision: Precision) -> Self {
        Self { precision }
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    fn compare<F>(&self, identity: Identity, tolerance: f64, eval: F) -> Result<IdentityReport>
    where
        F: Fn(&dyn ArithDyn) -> Result<(f64, f64, f64)>,
    {
        let (lhs, rhs, err) = match self.precision {
            Precision::Double => eval(&DoubleArith)?,
            Precision::Extended { digits } => eval(&ExtendedArith::new(digits)?)?,
        };
        Ok(IdentityReport::new(identity, lhs, rhs, err, tolerance))
    }

    pub fn cosine_sum(&self, d: usize, m: usize) -> Result<IdentityReport> {
        check_dm(d, m)?;
        self.compare(Identity::CosineSum { d, m }, COSINE_SUM_TOLERANCE, |ar| {
            ar.pair(Family::CosineSum { d, m })
        })
    }

    pub fn cot_cosine_sum(&self, d: usize, m: usize) -> Result<IdentityReport> {
        check_dm(d, m)?;
        self.compare(Identity::CotCosineSum { d, m }, COSINE_SUM_TOLERANCE, |ar| {
            ar.pair(Family::CotCosineSum { d, m })
        })
    }

    pub fn theorem1(&self, k: usize, a: usize, b: f64) -> Result<IdentityReport> {
        check_theorem(k, a, b)?;
        self.compare(Identity::Theorem1 { k, a, b }, theorem_tolerance(k), |ar| {
            ar.pair(Family::Theorem { k, a, b, sine: false })
        })
    }

    pub fn theorem2(&self, k: usize, a: usize, b: f64) -> Result<IdentityReport> {
        check_theorem(k, a, b)?;
        self.compare(Identity::Theorem2 { k, a, b }, theorem_tolerance(k), |ar| {
            ar.pair(Family::Theorem { k, a, b, sine: true })
        })
    }

    pub fn hassan_identities(&self, d: usize) -> Result<(IdentityReport, IdentityReport)> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let alt = self.compare(Identity::HassanAlternating { d }, HASSAN_TOLERANCE, |ar| {
            ar.pair(Family::HassanAlternating { d })
        })?;
        let shifted = self.compare(Identity::HassanShifted { d }, HASSAN_TOLERANCE, |ar| {
            ar.pair(Family::HassanShifted { d })
        })?;
        Ok((alt, shifted))
    }
}

/// Object-safe wrapper so [`Checker::compare`] can take either arithmetic.
trait ArithDyn {
    /// Returns `(lhs, rhs, |lhs − rhs|)`, with the difference taken at full precision.
    fn pair(&self, family: Family) -> Result<(f64, f64, f64)>;
}

#[derive(Clone, Copy)]
enum Family {
    CosineSum { d: usize, m: usize },
    CotCosineSum { d: usize, m: usize },
    Theorem { k: usize, a: usize, b: f64, sine: bool },
    HassanAlternating { d: usize },
    HassanShifted { d: usize },
}

impl<A: Arith> ArithDyn for A {
    fn pair(&self, family: Family) -> Result<(f64, f64, f64)> {
        let (lhs, rhs) = match family {
            Family::CosineSum { d, m } => (cosine_sum_in(self, d, m), self.int(0)),
            Family::CotCosineSum { d, m } => (cot_cosine_sum_in(self, d, m), self.int(d as i64)),
            Family::Theorem { k, a, b, sine } => theorem_in(self, k, a, b, sine),
            Family::HassanAlternating { d } => (hassan_in(self, d).0, self.int(d as i64)),
            Family::HassanShifted { d } => (hassan_in(self, d).1, self.int(d as i64)),
        };
        let diff = self.sub(&lhs, &rhs);
        Ok((self.to_f64(&lhs)?, self.to_f64(&rhs)?, self.to_f64(&diff)?.abs()))
    }
}

/// `Σ_{α=0}^{d−1} cos((2πm/d)(α+1/4))`, zero for `1 ≤ m ≤ d−1`.
pub fn cosine_sum(d: usize, m: usize) -> Result<f64> {
    check_dm(d, m)?;
    Ok(cosine_sum_in(&DoubleArith, d, m))
}

/// `Σ_{α=0}^{d−1} cos((2πm/d)(α+1/4))·cot((π/d)(α+1/4))`, equal to `d` for `1 ≤ m ≤ d−1`.
pub fn cot_cosine_sum(d: usize, m: usize) -> Result<f64> {
    check_dm(d, m)?;
    Ok(cot_cosine_sum_in(&DoubleArith, d, m))
}

pub fn theorem1(k: usize, a: usize, b: f64) -> Result<IdentityReport> {
    Checker::default().theorem1(k, a, b)
}

pub fn theorem2(k: usize, a: usize, b: f64) -> Result<IdentityReport> {
    Checker::default().theorem2(k, a, b)
}

pub fn hassan_identities(d: usize) -> Result<(IdentityReport, IdentityReport)> {
    Checker::default().hassan_identities(d)
}

/// Coefficient of `Σ_{p>q} c_p c_q` in the Bell value at canonical settings, assembled
/// from the weights `(1/√2)(cot − 1)`, the prefactor `4/d`, the factor 2 from pairing
/// `p ≠ q`, and the closed forms `cot_cosine_sum = d`, `cosine_sum = 0`.
pub fn relation_coefficient(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let (cot_cos, cos) = (d as f64, 0.0);
    Ok(4.0 / d as f64 * FRAC_1_SQRT_2 * 2.0 * (cot_cos - cos))
}

/// Same assembly with the two sums evaluated numerically at separation `m`.
pub fn relation_coefficient_numeric(d: usize, m: usize) -> Result<f64> {
    let (cot_cos, cos) = (cot_cosine_sum(d, m)?, cosine_sum(d, m)?);
    Ok(4.0 / d as f64 * FRAC_1_SQRT_2 * 2.0 * (cot_cos - cos))
}

/// Parameter grid for a full verification sweep.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    /// Dimensions for the two cosine sums (all `m` in `1..d`).
    pub cosine_d: Vec<usize>,
    /// Dimensions for the Hassan identities, the weight zero-sum and the relation coefficient.
    pub hassan_d: Vec<usize>,
    /// Term counts `k` for the theorems (all `a` in `1..k`).
    pub k: Vec<usize>,
    pub b: Vec<f64>,
    pub precision: Precision,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            cosine_d: (2..=64).collect(),
            hassan_d: (2..=100).collect(),
            k: (2..=40).collect(),
            b: vec![0.1, 0.25, 0.3, 0.45, 0.6, 0.75, 0.9],
            precision: Precision::Double,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Checked(IdentityReport),
    /// Parameters excluded by a precondition, such as pole proximity.
    Skipped { identity: Identity, reason: String },
}

impl SweepOutcome {
    pub fn identity(&self) -> &Identity {
        match self {
            SweepOutcome::Checked(r) => &r.identity,
            SweepOutcome::Skipped { identity, .. } => identity,
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self, SweepOutcome::Checked(r) if !r.pass)
    }
}

fn checked(identity: Identity, r: Result<IdentityReport>) -> Result<SweepOutcome> {
    match r {
        Ok(report) => Ok(SweepOutcome::Checked(report)),
        Err(e @ Error::PoleProximity { .. }) => {
            Ok(SweepOutcome::Skipped { identity, reason: e.to_string() })
        }
        Err(e) => Err(e),
    }
}

fn weights_report(d: usize) -> Result<IdentityReport> {
    let sum = bell_weights(d)?.sum();
    Ok(IdentityReport::new(Identity::WeightsZeroSum { d }, sum, 0.0, sum.abs(), WEIGHTS_TOLERANCE))
}

fn relation_report(d: usize) -> Result<IdentityReport> {
    let mut worst = relation_coefficient(d)?;
    for m in 1..d {
        let c = relation_coefficient_numeric(d, m)?;
        if (c - 4.0 * SQRT_2).abs() > (worst - 4.0 * SQRT_2).abs() {
            worst = c;
        }
    }
    let target = 4.0 * SQRT_2;
    Ok(IdentityReport::new(
        Identity::RelationCoefficient { d },
        worst,
        target,
        (worst - target).abs(),
        RELATION_TOLERANCE.max(1e-13 * d as f64),
    ))
}

/// Runs every identity on the grid. Output order is fixed by the grid, not by scheduling.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepOutcome>> {
    let mut cases = Vec::new();
    for &d in &grid.cosine_d {
        for m in 1..d {
            cases.push(Identity::CosineSum { d, m });
            cases.push(Identity::CotCosineSum { d, m });
        }
    }
    for &k in &grid.k {
        for a in 1..k {
            for &b in &grid.b {
                cases.push(Identity::Theorem1 { k, a, b });
                cases.push(Identity::Theorem2 { k, a, b });
            }
        }
    }
    for &d in &grid.hassan_d {
        cases.push(Identity::HassanAlternating { d });
        cases.push(Identity::HassanShifted { d });
        cases.push(Identity::WeightsZeroSum { d });
        cases.push(Identity::RelationCoefficient { d });
    }
    let checker = Checker::new(grid.precision);
    cases
        .into_par_iter()
        .map(|id| {
            let report = match id {
                Identity::CosineSum { d, m } => checker.cosine_sum(d, m),
                Identity::CotCosineSum { d, m } => checker.cot_cosine_sum(d, m),
                Identity::Theorem1 { k, a, b } => checker.theorem1(k, a, b),
                Identity::Theorem2 { k, a, b } => checker.theorem2(k, a, b),
                Identity::HassanAlternating { d } => checker.hassan_identities(d).map(|p| p.0),
                Identity::HassanShifted { d } => checker.hassan_identities(d).map(|p| p.1),
                Identity::WeightsZeroSum { d } => weights_report(d),
                Identity::RelationCoefficient { d } => relation_report(d),
            };
            checked(id, report)
        })
        .collect()
}

/// CSV columns: `schema_version,identity,d,m,k,a,b,lhs,rhs,abs_error,tolerance,pass`.
/// `pass` is `true`, `false` or `skipped`; unused parameter cells are empty.
pub fn write_sweep_csv<W: Write>(rows: &[SweepOutcome], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "schema_version", "identity", "d", "m", "k", "a", "b", "lhs", "rhs", "abs_error",
        "tolerance", "pass",
    ])?;
    for row in rows {
        let id = row.identity();
        let mut rec = vec![CSV_SCHEMA_VERSION.to_string(), id.name().to_string()];
        rec.extend(id.csv_params().into_iter().map(Option::unwrap_or_default));
        match row {
            SweepOutcome::Checked(r) => rec.extend([
                sig17(r.lhs),
                sig17(r.rhs),
                sig17(r.abs_error),
                sig17(r.tolerance),
                r.pass.to_string(),
            ]),
            SweepOutcome::Skipped { .. } => {
                rec.extend(["", "", "", "", "skipped"].map(String::from))
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
