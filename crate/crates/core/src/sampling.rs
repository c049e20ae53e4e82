//! Finite-statistics Bell experiments: multinomial outcome counts drawn from the exact
//! table (optionally mixed with uniform noise) and plug-in estimates with bootstrap
//! error bars.
//!
//! All randomness comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`, so a
//! seed fixes the output on every platform.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bell::{relation_slope, slk_value, BellWeights};
use crate::error::{Error, Result};
use crate::measurement::{probability_table, PhaseOffsets, ProbabilityTable, Setting, SETTING_PAIRS};
use crate::numfmt;
use crate::state::SchmidtState;

pub const DEFAULT_RESAMPLES: usize = 200;

/// Everything needed to simulate one run.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub state: SchmidtState,
    pub offsets: PhaseOffsets,
    pub shots_per_setting: u64,
    pub visibility: f64,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn new(state: SchmidtState, shots_per_setting: u64, seed: u64) -> Self {
        Self {
            state,
            offsets: PhaseOffsets::CANONICAL,
            shots_per_setting,
            visibility: 1.0,
            seed,
        }
    }

    pub fn with_offsets(mut self, offsets: PhaseOffsets) -> Self {
        self.offsets = offsets;
        self
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots_per_setting < 1 {
            return Err(Error::InvalidPlan("shots_per_setting must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidPlan(format!(
                "visibility must lie in [0, 1], got {}",
                self.visibility
            )));
        }
        Ok(())
    }

    /// The table the counts are drawn from: `v·P + (1−v)/d²`.
    pub fn sampling_table(&self) -> Result<ProbabilityTable> {
        self.validate()?;
        probability_table(&self.state, &self.offsets).with_visibility(self.visibility)
    }
}

/// Outcome counts for each setting pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    d: usize,
    // Row-major d×d blocks in SETTING_PAIRS order.
    blocks: [Vec<u64>; 4],
}

impl CountTable {
    pub fn from_blocks(d: usize, blocks: [Vec<u64>; 4]) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if let Some(b) = blocks.iter().find(|b| b.len() != d * d) {
            return Err(Error::DimensionMismatch { expected: d * d, got: b.len() });
        }
        Ok(Self { d, blocks })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn block(&self, a: Setting, b: Setting) -> &[u64] {
        &self.blocks[2 * a.index() + b.index()]
    }

    pub fn get(&self, a: Setting, b: Setting, k: usize, l: usize) -> u64 {
        self.block(a, b)[k * self.d + l]
    }

    /// Total shots recorded for one setting pair.
    pub fn shots(&self, a: Setting, b: Setting) -> u64 {
        self.block(a, b).iter().sum()
    }

    /// Relative frequencies as a probability table.
    pub fn frequencies(&self) -> Result<ProbabilityTable> {
        let mut blocks: [Vec<f64>; 4] = Default::default();
        for (idx, &(a, b)) in SETTING_PAIRS.iter().enumerate() {
            let n = self.shots(a, b);
            if n == 0 {
                return Err(Error::EmptyBlock { a: a.number(), b: b.number() });
            }
            blocks[idx] = self.block(a, b).iter().map(|&c| c as f64 / n as f64).collect();
        }
        ProbabilityTable::from_blocks(self.d, blocks)
    }

    /// CSV with header `a,b,k,l,count`. Zero cells are written too.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["a", "b", "k", "l", "count"])?;
        for &(a, b) in &SETTING_PAIRS {
            for k in 0..self.d {
                for l in 0..self.d {
                    out.write_record([
                        a.number().to_string(),
                        b.number().to_string(),
                        k.to_string(),
                        l.to_string(),
                        self.get(a, b, k, l).to_string(),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `a,b,k,l,count` rows. Cells that never appear count as zero; a repeated
    /// cell is an error. Labels must be below `d`.
    pub fn read_csv<R: Read>(r: R, d: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            a: usize,
            b: usize,
            k: usize,
            l: usize,
            count: u64,
        }
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let mut blocks: [Vec<u64>; 4] = std::array::from_fn(|_| vec![0; d * d]);
        let mut seen = vec![false; 4 * d * d];
        let mut rdr = csv::Reader::from_reader(r);
        for row in rdr.deserialize() {
            let row: Row = row?;
            let a = Setting::from_number(row.a)?;
            let b = Setting::from_number(row.b)?;
            for label in [row.k, row.l] {
                if label >= d {
                    return Err(Error::LabelOutOfRange { label, d });
                }
            }
            let block = 2 * a.index() + b.index();
            let cell = row.k * d + row.l;
            if std::mem::replace(&mut seen[block * d * d + cell], true) {
                return Err(Error::Malformed(format!(
                    "duplicate count row ({},{},{},{})",
                    row.a, row.b, row.k, row.l
                )));
            }
            blocks[block][cell] = row.count;
        }
        Self::from_blocks(d, blocks)
    }

    /// `{"d": .., "shots": {"a,b": n}, "blocks": {"a,b": [[..]..]}}`.
    pub fn to_json(&self) -> Result<String> {
        let repr = CountRepr {
            d: self.d,
            shots: SETTING_PAIRS
                .iter()
                .map(|&(a, b)| (key(a, b), self.shots(a, b)))
                .collect(),
            blocks: SETTING_PAIRS
                .iter()
                .map(|&(a, b)| (key(a, b), self.block(a, b).chunks(self.d).map(<[u64]>::to_vec).collect()))
                .collect(),
        };
        Ok(serde_json::to_string(&repr)?)
    }

    /// Parses [`to_json`](Self::to_json) output; a `shots` map, if present, must match the blocks.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: CountRepr = serde_json::from_str(text)?;
        let mut blocks: [Vec<u64>; 4] = Default::default();
        for (idx, &(a, b)) in SETTING_PAIRS.iter().enumerate() {
            let k = key(a, b);
            let rows = repr.blocks.get(&k).ok_or_else(|| Error::Malformed(format!("missing block {k}")))?;
            if rows.len() != repr.d || rows.iter().any(|r| r.len() != repr.d) {
                return Err(Error::Malformed(format!("block {k} is not {0}x{0}", repr.d)));
            }
            blocks[idx] = rows.concat();
            let total: u64 = blocks[idx].iter().sum();
            if let Some(&declared) = repr.shots.get(&k) {
                if declared != total {
                    return Err(Error::Malformed(format!(
                        "block {k} holds {total} counts but declares {declared} shots"
                    )));
                }
            }
        }
        Self::from_blocks(repr.d, blocks)
    }
}

fn key(a: Setting, b: Setting) -> String {
    format!("{},{}", a.number(), b.number())
}

#[derive(Serialize, Deserialize)]
struct CountRepr {
    d: usize,
    #[serde(default)]
    shots: BTreeMap<String, u64>,
    blocks: BTreeMap<String, Vec<Vec<u64>>>,
}

/// Draws one multinomial vector by sequential conditional binomials.
fn multinomial<R: rand::Rng>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            out[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let x = Binomial::new(remaining, q).expect("probability clamped to [0, 1]").sample(rng);
        out[i] = x;
        remaining -= x;
        mass -= p;
    }
    out
}

fn draw_counts<R: rand::Rng>(rng: &mut R, table: &ProbabilityTable, shots: [u64; 4]) -> CountTable {
    let blocks = std::array::from_fn(|idx| {
        let (a, b) = SETTING_PAIRS[idx];
        multinomial(rng, shots[idx], table.block(a, b))
    });
    CountTable { d: table.dim(), blocks }
}

/// Simulates `shots_per_setting` outcomes for each setting pair, in the order
/// (1,1), (1,2), (2,1), (2,2).
pub fn simulate_counts(plan: &ExperimentPlan) -> Result<CountTable> {
    let table = plan.sampling_table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    Ok(draw_counts(&mut rng, &table, [plan.shots_per_setting; 4]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    PlugIn,
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellEstimate {
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    pub std_error: f64,
    /// Smallest per-pair shot count.
    pub shots: u64,
    pub method: EstimateMethod,
    /// Set for concurrence estimates that fall outside `[0, 1]`.
    pub out_of_range: bool,
}

/// Bootstrap settings. `resamples = 0` gives a bare plug-in estimate with zero error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bootstrap {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self { resamples: DEFAULT_RESAMPLES, seed: 0 }
    }
}

/// Bell-SLK value of a frequency table, with no error bar.
pub fn plug_in_slk(frequencies: &ProbabilityTable) -> f64 {
    let weights = BellWeights::new(frequencies.dim()).expect("tables have d >= 2");
    slk_value(frequencies, &weights)
}

/// [`plug_in_slk`] divided by `2√2(d−1)`.
pub fn plug_in_concurrence(frequencies: &ProbabilityTable) -> f64 {
    plug_in_slk(frequencies) / relation_slope(frequencies.dim()).expect("tables have d >= 2")
}

/// Plug-in Bell-SLK estimate with the default 200-resample bootstrap.
pub fn estimate_slk(counts: &CountTable) -> Result<BellEstimate> {
    estimate_slk_with(counts, Bootstrap::default())
}

/// Plug-in estimate; the error bar is the standard deviation of the functional over
/// bootstrap resamples drawn within each setting block independently.
pub fn estimate_slk_with(counts: &CountTable, bootstrap: Bootstrap) -> Result<BellEstimate> {
    let freqs = counts.frequencies()?;
    let weights = BellWeights::new(counts.dim())?;
    let value = slk_value(&freqs, &weights);
    let shots = SETTING_PAIRS.map(|(a, b)| counts.shots(a, b));
    let min_shots = shots.iter().copied().min().unwrap_or(0);
    if bootstrap.resamples == 0 {
        return Ok(BellEstimate {
            value,
            std_error: 0.0,
            shots: min_shots,
            method: EstimateMethod::PlugIn,
            out_of_range: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(bootstrap.seed);
    let replicates: Vec<f64> = (0..bootstrap.resamples)
        .map(|_| {
            let resampled = draw_counts(&mut rng, &freqs, shots);
            let f = resampled.frequencies().expect("resample keeps block totals");
            slk_value(&f, &weights)
        })
        .collect();
    Ok(BellEstimate {
        value,
        std_error: sample_std(&replicates),
        shots: min_shots,
        method: EstimateMethod::Bootstrap,
        out_of_range: false,
    })
}

/// Concurrence estimate from the inverted linear relation, scaled error bar included.
///
/// Only meaningful for counts taken on a pure state at canonical offsets. Values are
/// not clamped; `out_of_range` flags results outside `[0, 1]`.
pub fn estimate_concurrence(counts: &CountTable) -> Result<BellEstimate> {
    estimate_concurrence_with(counts, Bootstrap::default())
}

pub fn estimate_concurrence_with(counts: &CountTable, bootstrap: Bootstrap) -> Result<BellEstimate> {
    let slk = estimate_slk_with(counts, bootstrap)?;
    let slope = relation_slope(counts.dim())?;
    let value = slk.value / slope;
    Ok(BellEstimate {
        value,
        std_error: slk.std_error / slope,
        out_of_range: !(0.0..=1.0).contains(&value),
        ..slk
    })
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
