//! Command layer behind the `slk` binary: configuration, the five commands, and their
//! JSON/CSV output.
//!
//! Single-result commands emit one JSON object; sweeps emit CSV. Both carry a schema
//! version, and every real is written with 17 significant digits, so a fixed config
//! produces byte-identical output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{relation_slope, slk_from_correlations, slk_from_probabilities};
use crate::error::{Error, Result};
use crate::identities::{self, Precision, SweepGrid};
use crate::measurement::{correlation_spectrum, probability_table, PhaseOffsets};
use crate::numfmt::{self, sig17};
use crate::optimize::{optimize_with, OptimizeOptions};
use crate::sampling::{
    estimate_concurrence_with, estimate_slk_with, plug_in_slk, simulate_counts, Bootstrap,
    CountTable, ExperimentPlan, DEFAULT_RESAMPLES,
};
use crate::state::SchmidtState;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BOOTSTRAP: usize = DEFAULT_RESAMPLES;

/// Exit status for a failed verification (an identity sweep with failures).
pub const EXIT_VERIFICATION_FAILED: u8 = 1;
/// Exit status for usage or configuration errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evaluate,
    SweepRelation,
    Identities,
    Sample,
    Optimize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Coeffs(Vec<f64>),
    MaxEntangled,
    /// `count` states drawn with seeds `seed, seed+1, ...`.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::ParameterOutOfRange(format!("unknown format {other:?}"))),
        }
    }
}

/// Everything a command needs. Fields a command does not use are ignored.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    pub state: Option<StateSource>,
    pub offsets: PhaseOffsets,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub shots: u64,
    pub visibility: f64,
    pub seed: u64,
    pub bootstrap: usize,
    /// Externally produced count file (`.csv` or `.json`) to estimate from.
    pub counts_in: Option<PathBuf>,
    pub counts_out: Option<PathBuf>,
    pub budget: usize,
    pub trace: Option<PathBuf>,
    pub k: Option<Vec<usize>>,
    pub b: Option<Vec<f64>>,
    pub digits: Option<u32>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dims: Vec::new(),
            state: None,
            offsets: PhaseOffsets::CANONICAL,
            format: None,
            out: None,
            shots: 1_000_000,
            visibility: 1.0,
            seed: 0,
            bootstrap: DEFAULT_RESAMPLES,
            counts_in: None,
            counts_out: None,
            budget: 100_000,
            trace: None,
            k: None,
            b: None,
            digits: None,
        }
    }

    fn expect_format(&self, native: OutputFormat) -> Result<()> {
        match self.format {
            Some(f) if f != native => Err(Error::ParameterOutOfRange(format!(
                "{:?} writes {:?} output only",
                self.command, native
            ))),
            _ => Ok(()),
        }
    }

    fn single_dim(&self) -> Result<Option<usize>> {
        match self.dims.as_slice() {
            [] => Ok(None),
            [d] => Ok(Some(*d)),
            _ => Err(Error::ParameterOutOfRange("this command takes a single --d".into())),
        }
    }

    /// Resolves the single state a per-state command works on.
    pub fn single_state(&self) -> Result<SchmidtState> {
        let d = self.single_dim()?;
        match &self.state {
            Some(StateSource::Coeffs(c)) => SchmidtState::new(d.unwrap_or(c.len()), c.clone()),
            Some(StateSource::MaxEntangled) => SchmidtState::maximally_entangled(
                d.ok_or_else(|| Error::ParameterOutOfRange("--max-entangled needs --d".into()))?,
            ),
            Some(StateSource::Random { count: 1, seed }) => SchmidtState::random(
                d.ok_or_else(|| Error::ParameterOutOfRange("--random needs --d".into()))?,
                *seed,
            ),
            Some(StateSource::Random { .. }) => {
                Err(Error::ParameterOutOfRange("this command takes a single state (--random 1)".into()))
            }
            None => Err(Error::ParameterOutOfRange(
                "no state given: use --coeffs, --max-entangled or --random".into(),
            )),
        }
    }
}

/// Parses `3`, `2,3,5` or the inclusive range `2..6`.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::ParameterOutOfRange(format!("cannot parse integer list {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::ParameterOutOfRange(format!("cannot parse number list {text:?}")))
        })
        .collect()
}

pub fn parse_offsets(text: &str) -> Result<PhaseOffsets> {
    let v = parse_f64_list(text)?;
    let arr: [f64; 4] = v
        .try_into()
        .map_err(|_| Error::ParameterOutOfRange("--offsets needs four values δ1,δ2,ε1,ε2".into()))?;
    PhaseOffsets::from_array(arr)
}

/// Text produced by a command and the exit status it calls for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, exit_code: 0 }
    }
}

/// Runs the configured command. The caller decides where the text goes.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        Command::Evaluate => cmd_evaluate(config),
        Command::SweepRelation => cmd_sweep_relation(config),
        Command::Identities => cmd_identities(config),
        Command::Sample => cmd_sample(config),
        Command::Optimize => cmd_optimize(config),
    }
}

/// Runs the command and writes its text to `config.out`, or to `stdout` when unset.
pub fn run<W: Write>(config: &RunConfig, stdout: W) -> Result<u8> {
    let outcome = execute(config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => {
            let mut w = stdout;
            w.write_all(outcome.text.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(outcome.exit_code)
}

fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    schema_version: u32,
    command: &'static str,
    d: usize,
    #[serde(serialize_with = "numfmt::ser_f64_slice")]
    coeffs: &'a [f64],
    coeffs_rescaled: bool,
    offsets: PhaseOffsets,
    canonical_offsets: bool,
    #[serde(serialize_with = "numfmt::ser_f64")]
    value: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    value_correlation: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    path_difference: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    lr_bound: f64,
    violated: bool,
    #[serde(serialize_with = "numfmt::ser_f64")]
    concurrence: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    predicted: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    residual: f64,
    state_digest: String,
}

/// Both evaluation routes, the bound, concurrence and the linear prediction for one state.
///
/// `predicted` is `2√2(d−1)·C`; the residual `value − predicted` vanishes only at
/// canonical offsets.
pub fn cmd_evaluate(config: &RunConfig) -> Result<Outcome> {
    config.expect_format(OutputFormat::Json)?;
    let state = config.single_state()?;
    let d = state.dim();
    let table = probability_table(&state, &config.offsets);
    let by_prob = slk_from_probabilities(&table);
    let by_corr = slk_from_correlations(&correlation_spectrum(&table))?;
    let concurrence = state.concurrence().value();
    let predicted = relation_slope(d)? * concurrence;
    let report = EvaluateReport {
        schema_version: SCHEMA_VERSION,
        command: "evaluate",
        d,
        coeffs: state.coeffs(),
        coeffs_rescaled: state.was_rescaled(),
        offsets: config.offsets,
        canonical_offsets: config.offsets == PhaseOffsets::CANONICAL,
        value: by_prob.value,
        value_correlation: by_corr.value,
        path_difference: by_prob.value - by_corr.value,
        lr_bound: by_prob.lr_bound,
        violated: by_prob.violated,
        concurrence,
        predicted,
        residual: by_prob.value - predicted,
        state_digest: state.digest(),
    };
    Ok(Outcome::ok(to_json_line(&report)?))
}

/// One row of the relation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationRow {
    pub d: usize,
    pub seed: u64,
    pub concurrence: f64,
    pub i_slk: f64,
    pub predicted: f64,
    pub residual: f64,
}

/// Bell value against concurrence for `count` random states per dimension, canonical offsets.
pub fn relation_rows(dims: &[usize], count: usize, seed: u64) -> Result<Vec<RelationRow>> {
    let mut jobs: Vec<(usize, u64)> = dims
        .iter()
        .flat_map(|&d| (0..count as u64).map(move |i| (d, seed.wrapping_add(i))))
        .collect();
    jobs.sort_unstable();
    jobs.dedup();
    jobs.par_iter()
        .map(|&(d, s)| {
            let state = SchmidtState::random(d, s)?;
            let concurrence = state.concurrence().value();
            let i_slk = slk_from_probabilities(&probability_table(&state, &PhaseOffsets::CANONICAL)).value;
            let predicted = relation_slope(d)? * concurrence;
            Ok(RelationRow { d, seed: s, concurrence, i_slk, predicted, residual: i_slk - predicted })
        })
        .collect()
}

/// Ordinary least-squares `(slope, intercept)` of `y` on `x`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// CSV `schema_version,d,seed,concurrence,i_slk,predicted,residual`, sorted by `(d, seed)`.
pub fn cmd_sweep_relation(config: &RunConfig) -> Result<Outcome> {
    config.expect_format(OutputFormat::Csv)?;
    let (count, seed) = match &config.state {
        None => (100, config.seed),
        Some(StateSource::Random { count, seed }) => (*count, *seed),
        Some(_) => {
            return Err(Error::ParameterOutOfRange("sweep-relation draws random states only".into()))
        }
    };
    if config.dims.is_empty() {
        return Err(Error::ParameterOutOfRange("sweep-relation needs --d".into()));
    }
    if count == 0 {
        return Err(Error::ParameterOutOfRange("--random must be at least 1".into()));
    }
    let rows = relation_rows(&config.dims, count, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["schema_version", "d", "seed", "concurrence", "i_slk", "predicted", "residual"])?;
    for r in &rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            r.d.to_string(),
            r.seed.to_string(),
            sig17(r.concurrence),
            sig17(r.i_slk),
            sig17(r.predicted),
            sig17(r.residual),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(Outcome::ok(String::from_utf8(bytes).expect("csv output is utf-8")))
}

/// Identity sweep as CSV; exit status 1 when any checked identity fails.
pub fn cmd_identities(config: &RunConfig) -> Result<Outcome> {
    config.expect_format(OutputFormat::Csv)?;
    let mut grid = SweepGrid::default();
    if !config.dims.is_empty() {
        if config.dims.iter().any(|&d| d < 2) {
            return Err(Error::ParameterOutOfRange("dimensions must be at least 2".into()));
        }
        grid.cosine_d = config.dims.clone();
        grid.hassan_d = config.dims.clone();
    }
    if let Some(k) = &config.k {
        if k.iter().any(|&k| k < 2) {
            return Err(Error::ParameterOutOfRange("k must be at least 2".into()));
        }
        grid.k = k.clone();
    }
    if let Some(b) = &config.b {
        if b.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::ParameterOutOfRange("b values must lie in (0, 1)".into()));
        }
        grid.b = b.clone();
    }
    if let Some(digits) = config.digits {
        grid.precision = Precision::Extended { digits };
    }
    let rows = identities::sweep(&grid)?;
    let mut buf = Vec::new();
    identities::write_sweep_csv(&rows, &mut buf)?;
    let exit_code = if rows.iter().any(|r| r.failed()) { EXIT_VERIFICATION_FAILED } else { 0 };
    Ok(Outcome { text: String::from_utf8(buf).expect("csv output is utf-8"), exit_code })
}

#[derive(Serialize)]
struct SampleReport {
    schema_version: u32,
    command: &'static str,
    d: usize,
    source: &'static str,
    shots: u64,
    #[serde(serialize_with = "numfmt::ser_opt_f64")]
    visibility: Option<f64>,
    seed: Option<u64>,
    bootstrap: usize,
    #[serde(serialize_with = "numfmt::ser_f64")]
    estimate: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    std_error: f64,
    #[serde(serialize_with = "numfmt::ser_opt_f64")]
    analytic: Option<f64>,
    #[serde(serialize_with = "numfmt::ser_opt_f64")]
    z_score: Option<f64>,
    #[serde(serialize_with = "numfmt::ser_f64")]
    concurrence_estimate: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    concurrence_std_error: f64,
    concurrence_out_of_range: bool,
}

fn read_counts(path: &Path, d: usize) -> Result<CountTable> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        CountTable::from_json(&std::fs::read_to_string(path)?)
    } else {
        CountTable::read_csv(File::open(path)?, d)
    }
}

/// Simulated (or ingested) counts, the bootstrap estimate and its z-score against the
/// exact value of the noisy table.
pub fn cmd_sample(config: &RunConfig) -> Result<Outcome> {
    config.expect_format(OutputFormat::Json)?;
    let bootstrap = Bootstrap { resamples: config.bootstrap, seed: config.seed };
    let (counts, analytic, source, visibility, seed) = match &config.counts_in {
        Some(path) => {
            let state = config.state.as_ref().map(|_| config.single_state()).transpose()?;
            let d = match (config.single_dim()?, &state) {
                (Some(d), _) => d,
                (None, Some(s)) => s.dim(),
                (None, None) => {
                    return Err(Error::ParameterOutOfRange("reading counts needs --d or a state".into()))
                }
            };
            let counts = read_counts(path, d)?;
            if counts.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: counts.dim() });
            }
            // Without a model of the source the analytic value is only known for v = 1.
            let analytic = state
                .map(|s| plug_in_slk(&probability_table(&s, &config.offsets)));
            (counts, analytic, "file", None, None)
        }
        None => {
            let plan = ExperimentPlan::new(config.single_state()?, config.shots, config.seed)
                .with_offsets(config.offsets)
                .with_visibility(config.visibility);
            let counts = simulate_counts(&plan)?;
            let analytic = plug_in_slk(&plan.sampling_table()?);
            (counts, Some(analytic), "simulated", Some(config.visibility), Some(config.seed))
        }
    };
    if let Some(path) = &config.counts_out {
        let mut w = create(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            w.write_all(counts.to_json()?.as_bytes())?;
            w.write_all(b"\n")?;
        } else {
            counts.write_csv(&mut w)?;
        }
        w.flush()?;
    }
    let est = estimate_slk_with(&counts, bootstrap)?;
    let conc = estimate_concurrence_with(&counts, bootstrap)?;
    let z_score = match analytic {
        Some(a) if est.std_error > 0.0 => Some((est.value - a) / est.std_error),
        _ => None,
    };
    let report = SampleReport {
        schema_version: SCHEMA_VERSION,
        command: "sample",
        d: counts.dim(),
        source,
        shots: est.shots,
        visibility,
        seed,
        bootstrap: config.bootstrap,
        estimate: est.value,
        std_error: est.std_error,
        analytic,
        z_score,
        concurrence_estimate: conc.value,
        concurrence_std_error: conc.std_error,
        concurrence_out_of_range: conc.out_of_range,
    };
    Ok(Outcome::ok(to_json_line(&report)?))
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    schema_version: u32,
    command: &'static str,
    d: usize,
    #[serde(serialize_with = "numfmt::ser_f64_slice")]
    coeffs: &'a [f64],
    budget: usize,
    seed: u64,
    #[serde(flatten)]
    result: &'a crate::optimize::OptimizationResult,
}

/// Phase-offset search result; the trace goes to `config.trace` as CSV when set.
pub fn cmd_optimize(config: &RunConfig) -> Result<Outcome> {
    config.expect_format(OutputFormat::Json)?;
    let state = config.single_state()?;
    let mut opts = OptimizeOptions::new(config.budget, config.seed);
    if config.trace.is_some() {
        opts = opts.with_trace();
    }
    let result = optimize_with(&state, opts)?;
    if let Some(path) = &config.trace {
        let mut w = create(path)?;
        result.write_trace_csv(&mut w)?;
        w.flush()?;
    }
    let report = OptimizeReport {
        schema_version: SCHEMA_VERSION,
        command: "optimize",
        d: state.dim(),
        coeffs: state.coeffs(),
        budget: config.budget,
        seed: config.seed,
        result: &result,
    };
    Ok(Outcome::ok(to_json_line(&report)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lists() {
        assert_eq!(parse_usize_list("3").unwrap(), vec![3]);
        assert_eq!(parse_usize_list("2,3, 5").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_usize_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_usize_list("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_usize_list("5..2").is_err());
        assert!(parse_usize_list("x").is_err());
    }

    #[test]
    fn offsets_flag() {
        assert_eq!(parse_offsets("0,0.5,0.25,-0.25").unwrap(), PhaseOffsets::CANONICAL);
        assert!(parse_offsets("0,0.5,0.25").is_err());
        assert!(parse_offsets("0,0.5,0.25,nan").is_err());
    }

    #[test]
    fn line_fit() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        let (m, c) = fit_line(&pts);
        assert!((m - 3.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_resolution_errors() {
        let mut cfg = RunConfig::new(Command::Evaluate);
        assert!(cfg.single_state().is_err());
        cfg.state = Some(StateSource::MaxEntangled);
        assert!(cfg.single_state().is_err());
        cfg.dims = vec![2, 3];
        assert!(cfg.single_state().is_err());
        cfg.dims = vec![3];
        assert_eq!(cfg.single_state().unwrap().dim(), 3);
        cfg.state = Some(StateSource::Coeffs(vec![1.0, 1.0]));
        assert!(matches!(cfg.single_state(), Err(Error::DimensionMismatch { .. })));
        cfg.state = Some(StateSource::Random { count: 4, seed: 1 });
        assert!(cfg.single_state().is_err());
    }

    #[test]
    fn wrong_format_is_rejected() {
        let mut cfg = RunConfig::new(Command::Evaluate);
        cfg.state = Some(StateSource::Coeffs(vec![1.0, 1.0]));
        cfg.format = Some(OutputFormat::Csv);
        assert!(execute(&cfg).is_err());
        cfg.format = Some(OutputFormat::Json);
        assert!(execute(&cfg).is_ok());
    }
}
