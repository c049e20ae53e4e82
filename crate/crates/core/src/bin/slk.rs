use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qudit_slk::report::{
    self, parse_f64_list, parse_offsets, parse_usize_list, Command, OutputFormat, RunConfig,
    StateSource, EXIT_USAGE,
};

#[derive(Parser)]
#[command(name = "slk", version, about = "Bell-functional evaluation for entangled qudit pairs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the Bell functional of one state by both routes.
    Evaluate(Common),
    /// Bell value against concurrence for random states (CSV).
    SweepRelation(Common),
    /// Check the trigonometric identities over a parameter grid (CSV).
    Identities {
        #[command(flatten)]
        common: Common,
        /// k values, e.g. `2..40` or `3,5,7`.
        #[arg(long)]
        k: Option<String>,
        /// b values in (0, 1), comma separated.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Evaluate in extended precision with this many decimal digits.
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Simulate finite-shot measurements and estimate the Bell value.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// Bootstrap resamples; 0 reports the plug-in value only.
        #[arg(long, default_value_t = report::DEFAULT_BOOTSTRAP)]
        bootstrap: usize,
        /// Estimate from an existing count file instead of simulating.
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Also write the count table (`.csv` or `.json`).
        #[arg(long)]
        counts_out: Option<PathBuf>,
    },
    /// Search measurement phase offsets for the largest Bell value.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Write every evaluation to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Dimension, list or inclusive range (`3`, `2,3,4`, `2..12`).
    #[arg(long)]
    d: Option<String>,
    /// Schmidt coefficients, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["max_entangled", "random"])]
    coeffs: Option<String>,
    #[arg(long, conflicts_with = "random")]
    max_entangled: bool,
    /// Number of random states (seeds `seed, seed+1, ...`).
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Phase offsets `δ1,δ2,ε1,ε2`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "canonical")]
    offsets: Option<String>,
    /// Use the canonical offsets (the default).
    #[arg(long)]
    canonical: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn base_config(command: Command, c: Common) -> qudit_slk::Result<RunConfig> {
    let mut cfg = RunConfig::new(command);
    cfg.seed = c.seed;
    cfg.out = c.out;
    if let Some(d) = c.d {
        cfg.dims = parse_usize_list(&d)?;
    }
    cfg.state = if let Some(text) = c.coeffs {
        Some(StateSource::Coeffs(parse_f64_list(&text)?))
    } else if c.max_entangled {
        Some(StateSource::MaxEntangled)
    } else {
        c.random.map(|count| StateSource::Random { count, seed: c.seed })
    };
    if let Some(o) = c.offsets {
        cfg.offsets = parse_offsets(&o)?;
    }
    if let Some(f) = c.format {
        cfg.format = Some(f.parse::<OutputFormat>()?);
    }
    Ok(cfg)
}

fn build(cli: Cli) -> qudit_slk::Result<RunConfig> {
    Ok(match cli.command {
        Cmd::Evaluate(c) => base_config(Command::Evaluate, c)?,
        Cmd::SweepRelation(c) => base_config(Command::SweepRelation, c)?,
        Cmd::Identities { common, k, b, digits } => {
            let mut cfg = base_config(Command::Identities, common)?;
            cfg.k = k.map(|k| parse_usize_list(&k)).transpose()?;
            cfg.b = b.map(|b| parse_f64_list(&b)).transpose()?;
            cfg.digits = digits;
            cfg
        }
        Cmd::Sample { common, shots, visibility, bootstrap, counts, counts_out } => {
            let mut cfg = base_config(Command::Sample, common)?;
            cfg.shots = shots;
            cfg.visibility = visibility;
            cfg.bootstrap = bootstrap;
            cfg.counts_in = counts;
            cfg.counts_out = counts_out;
            cfg
        }
        Cmd::Optimize { common, budget, trace } => {
            let mut cfg = base_config(Command::Optimize, common)?;
            cfg.budget = budget;
            cfg.trace = trace;
            cfg
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match build(cli).and_then(|cfg| report::run(&cfg, std::io::stdout().lock())) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
