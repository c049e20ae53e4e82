//! Search over measurement phase offsets for settings that raise the Bell-SLK value of
//! a fixed state.
//!
//! The amplitudes depend on the offsets only through `δ_a + ε_b`, so `δ₁` is pinned at
//! zero without losing any setting. The remaining `(δ₂, ε₁, ε₂)` each have period `d`.
//! The search runs a deterministic grid over one period followed by Nelder–Mead
//! refinement from the best grid points, the canonical point and a few seeded random
//! starts.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{slk_value, BellWeights};
use crate::error::{Error, Result};
use crate::measurement::{probability_table, PhaseOffsets};
use crate::numfmt::{self, sig17};
use crate::state::SchmidtState;

/// Smallest budget accepted: a 2×2×2 grid, the canonical point and refinement room.
pub const MIN_BUDGET: usize = 17;

const GRID_STARTS: usize = 3;
const RANDOM_STARTS: usize = 2;

/// Bell-SLK value of `state` measured at `offsets`.
pub fn evaluate_objective(state: &SchmidtState, offsets: &PhaseOffsets) -> f64 {
    let weights = BellWeights::new(state.dim()).expect("states have d >= 2");
    slk_value(&probability_table(state, offsets), &weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub eval_index: usize,
    pub offsets: PhaseOffsets,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_offsets: PhaseOffsets,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub best_value: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub canonical_value: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub improvement: f64,
    pub evaluations: usize,
    /// Points per axis actually used by the coarse grid.
    pub grid_points_per_axis: usize,
    #[serde(skip)]
    pub trace: Option<Vec<TraceEntry>>,
}

impl OptimizationResult {
    /// Writes the trace as CSV `eval_index,delta1,delta2,epsilon1,epsilon2,value`.
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["eval_index", "delta1", "delta2", "epsilon1", "epsilon2", "value"])?;
        for e in self.trace.iter().flatten() {
            let o = e.offsets.to_array();
            out.write_record([
                e.eval_index.to_string(),
                sig17(o[0]),
                sig17(o[1]),
                sig17(o[2]),
                sig17(o[3]),
                sig17(e.value),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizeOptions {
    pub budget: usize,
    pub seed: u64,
    pub record_trace: bool,
}

impl OptimizeOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self { budget, seed, record_trace: false }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

pub fn optimize(state: &SchmidtState, budget: usize, seed: u64) -> Result<OptimizationResult> {
    optimize_with(state, OptimizeOptions::new(budget, seed))
}

fn to_offsets(x: &[f64; 3]) -> PhaseOffsets {
    PhaseOffsets { delta1: 0.0, delta2: x[0], epsilon1: x[1], epsilon2: x[2] }
}

fn lexicographic(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Points per axis: full resolution is a step of `1/(4d)` over a period of `d`; it is
/// coarsened so the grid uses at most half the budget.
fn grid_resolution(d: usize, budget: usize) -> usize {
    let full = 4 * d * d;
    let cap = (budget - 1) / 2;
    let mut n = (cap as f64).cbrt().floor() as usize;
    while (n + 1).pow(3) <= cap {
        n += 1;
    }
    while n.pow(3) > cap {
        n -= 1;
    }
    n.clamp(2, full)
}

struct Recorder<'a> {
    state: &'a SchmidtState,
    weights: BellWeights,
    evaluations: usize,
    best: ([f64; 3], f64),
    trace: Option<Vec<TraceEntry>>,
}

impl Recorder<'_> {
    fn record(&mut self, x: [f64; 3], value: f64) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEntry { eval_index: self.evaluations, offsets: to_offsets(&x), value });
        }
        self.evaluations += 1;
        let better = value > self.best.1
            || (value == self.best.1 && lexicographic(&x, &self.best.0).is_lt());
        if better {
            self.best = (x, value);
        }
    }

    fn eval(&mut self, x: [f64; 3]) -> f64 {
        let value = slk_value(&probability_table(self.state, &to_offsets(&x)), &self.weights);
        self.record(x, value);
        value
    }
}

pub fn optimize_with(state: &SchmidtState, opts: OptimizeOptions) -> Result<OptimizationResult> {
    if opts.budget < MIN_BUDGET {
        return Err(Error::BudgetTooSmall { budget: opts.budget, min: MIN_BUDGET });
    }
    let d = state.dim();
    let period = d as f64;
    let weights = BellWeights::new(d)?;
    let canonical = [
        PhaseOffsets::CANONICAL.delta2,
        PhaseOffsets::CANONICAL.epsilon1,
        PhaseOffsets::CANONICAL.epsilon2,
    ];

    let mut rec = Recorder {
        state,
        weights: weights.clone(),
        evaluations: 0,
        best: (canonical, f64::NEG_INFINITY),
        trace: opts.record_trace.then(Vec::new),
    };
    let canonical_value = rec.eval(canonical);

    let n = grid_resolution(d, opts.budget);
    let step = period / n as f64;
    let points: Vec<[f64; 3]> = (0..n * n * n)
        .map(|i| [(i / (n * n)) as f64 * step, ((i / n) % n) as f64 * step, (i % n) as f64 * step])
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|x| slk_value(&probability_table(state, &to_offsets(x)), &weights))
        .collect();
    for (x, &v) in points.iter().zip(&values) {
        rec.record(*x, v);
    }

    let mut ranked: Vec<usize> = (0..points.len()).collect();
    ranked.sort_by(|&i, &j| {
        values[j].total_cmp(&values[i]).then_with(|| lexicographic(&points[i], &points[j]))
    });
    let mut starts: Vec<[f64; 3]> = ranked.iter().take(GRID_STARTS).map(|&i| points[i]).collect();
    starts.push(canonical);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..RANDOM_STARTS {
        starts.push([0; 3].map(|_| rng.random::<f64>() * period));
    }

    let remaining = opts.budget - rec.evaluations;
    let per_start = remaining / starts.len();
    if per_start > 3 {
        for x0 in starts {
            nelder_mead(&mut rec, x0, step, per_start);
        }
    }

    let (best_x, best_value) = rec.best;
    Ok(OptimizationResult {
        best_offsets: to_offsets(&best_x),
        best_value,
        canonical_value,
        improvement: best_value - canonical_value,
        evaluations: rec.evaluations,
        grid_points_per_axis: n,
        trace: rec.trace,
    })
}

/// Maximizes the objective from `x0` with a Nelder–Mead simplex of edge `scale`, using
/// at most `max_evals` evaluations.
fn nelder_mead(rec: &mut Recorder<'_>, x0: [f64; 3], scale: f64, max_evals: usize) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let start = rec.evaluations;
    let used = |rec: &Recorder<'_>| rec.evaluations - start;
    // Minimize the negated objective.
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, -rec.eval(x0)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += scale;
        simplex.push((x, -rec.eval(x)));
    }
    let lincomb = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] {
        std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
    };
    while used(rec) + 2 <= max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lexicographic(&a.0, &b.0)));
        let spread = simplex[3].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() < 1e-14 && size < 1e-10 {
            break;
        }
        let centroid: [f64; 3] = std::array::from_fn(|i| simplex[..3].iter().map(|(x, _)| x[i]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let xr = lincomb(&centroid, &worst.0, -ALPHA);
        let fr = -rec.eval(xr);
        if fr < simplex[0].1 {
            let xe = lincomb(&centroid, &worst.0, -GAMMA);
            let fe = -rec.eval(xe);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = lincomb(&centroid, &xr, RHO);
                (xc, -rec.eval(xc))
            } else {
                let xc = lincomb(&centroid, &worst.0, RHO);
                (xc, -rec.eval(xc))
            };
            if fc < worst.1.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                if used(rec) + 3 > max_evals {
                    break;
                }
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = lincomb(&best, &v.0, SIGMA);
                    *v = (x, -rec.eval(x));
                }
            }
        }
    }
}
