//! Argument parsing and report rendering for the `parsearch` binary.
//!
//! [`run`] does all the work and returns the rendered output plus the names
//! of failed checks, so the binary only handles I/O and the exit code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use parsearch::bounds::verify::{failures, verify_bounds, VerifyOptions};
use parsearch::matrix::{self, NMatrixView};
use parsearch::numeric::format_sig;
use parsearch::rng::derive_seed;
use parsearch::sim::{self, ExtraRate, Perturbation, TrialConfig};
use parsearch::{SearchParams, StrategyKind};

pub const DEFAULT_SEED: u64 = 1;
pub const SPEEDUP_CSV_HEADER: &str = "k,x,strategy,mode,theta,speedup,stderr,trials,truncation_t,tail_bound";

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "parsearch",
    version,
    about = "Non-coordinating parallel search: exact analysis, simulation and bound checks"
)]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, env = "PARSEARCH_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<std::path::PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Print the survival matrix N(x, t) of one searcher.
    Matrix(MatrixArgs),
    /// Speed-up x / E[T] from the exact sum or from simulation.
    Speedup(SpeedupArgs),
    /// Speed-up under per-searcher reorderings of the boxes.
    Robustness(RobustnessArgs),
    /// A fleet losing searchers at step 1 against a healthy smaller fleet.
    Crash(CrashArgs),
    /// Run the numeric checks of the analytical bounds.
    VerifyBounds(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixStrategy {
    Algorithm1,
    BlockRandom,
    Solo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedupStrategy {
    Algorithm1,
    BlockRandom,
    Solo,
    Coordinated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatrixArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long)]
    pub xmax: u64,
    #[arg(long)]
    pub tmax: u64,
    #[arg(long, value_enum, default_value_t = MatrixStrategy::Algorithm1)]
    pub strategy: MatrixStrategy,
    /// Block length for the block-random strategy.
    #[arg(long, default_value_t = StrategyKind::DEFAULT_BLOCK_LEN)]
    pub block: u64,
    /// Print exact fractions instead of decimals.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Refuse slabs with more cells than this.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_cells: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpeedupArgs {
    /// Fleet sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    /// Treasure indices, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "x_range")]
    pub x: Vec<u64>,
    /// `start:end` or `start:end:step`, inclusive.
    #[arg(long)]
    pub x_range: Option<XRange>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = SpeedupStrategy::Algorithm1)]
    pub strategy: SpeedupStrategy,
    #[arg(long, default_value_t = StrategyKind::DEFAULT_BLOCK_LEN)]
    pub block: u64,
    /// Number of simulated trials per point (mc mode).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Bound on the error of θ in exact mode.
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
    /// Report the largest θ over x .. x + 2(k+1) - 1 (exact mode, algorithm1).
    #[arg(long)]
    pub window: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RobustnessArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 10_000)]
    pub x: u64,
    /// identity, shift:C, extra-sqrt, extra-power:EXP:SCALE or local-shuffle:W; repeatable.
    #[arg(long = "perturbation", default_values_t = [PerturbationSpec::Shift(5), PerturbationSpec::ExtraSqrt])]
    pub perturbations: Vec<PerturbationSpec>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Largest allowed relative loss of speed-up.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CrashArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub k_prime: u32,
    #[arg(long, default_value_t = 2000)]
    pub x: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 5])]
    pub k: Vec<u32>,
    /// Treasure index for the finite-x checks.
    #[arg(long, default_value_t = 10_000)]
    pub x: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub column_tmax: u64,
    #[arg(long, default_value_t = 60)]
    pub product_max: u64,
    #[arg(long, default_value_t = 100)]
    pub waterfill_instances: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct XRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl XRange {
    pub fn values(&self) -> Vec<u64> {
        (self.start..=self.end).step_by(self.step as usize).collect()
    }
}

impl FromStr for XRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<u64>().map_err(|e| format!("`{p}`: {e}"));
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err("expected start:end or start:end:step".into()),
        };
        if start == 0 || end < start || step == 0 {
            return Err("need 1 <= start <= end and step >= 1".into());
        }
        Ok(Self { start, end, step })
    }
}

/// A reordering family as written on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum PerturbationSpec {
    Identity,
    Shift(u64),
    ExtraSqrt,
    ExtraPower { exponent: f64, scale: f64 },
    LocalShuffle(u64),
}

impl PerturbationSpec {
    /// The perturbation itself; shuffles draw their seed from `seed`.
    pub fn build(&self, seed: u64) -> Perturbation {
        match *self {
            PerturbationSpec::Identity => Perturbation::Identity,
            PerturbationSpec::Shift(c) => Perturbation::Shift { c },
            PerturbationSpec::ExtraSqrt => Perturbation::ExtraBoxes { rate: ExtraRate::Sqrt },
            PerturbationSpec::ExtraPower { exponent, scale } => Perturbation::ExtraBoxes {
                rate: ExtraRate::Power { exponent, scale },
            },
            PerturbationSpec::LocalShuffle(window) => Perturbation::LocalShuffle { window, seed },
        }
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationSpec::Identity => write!(f, "identity"),
            PerturbationSpec::Shift(c) => write!(f, "shift:{c}"),
            PerturbationSpec::ExtraSqrt => write!(f, "extra-sqrt"),
            PerturbationSpec::ExtraPower { exponent, scale } => write!(f, "extra-power:{exponent}:{scale}"),
            PerturbationSpec::LocalShuffle(w) => write!(f, "local-shuffle:{w}"),
        }
    }
}

impl From<PerturbationSpec> for String {
    fn from(p: PerturbationSpec) -> String {
        p.to_string()
    }
}

impl FromStr for PerturbationSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let uint = |p: &str| p.parse::<u64>().map_err(|e| format!("`{p}`: {e}"));
        let real = |p: &str| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"));
        let spec = match parts.as_slice() {
            ["identity"] => PerturbationSpec::Identity,
            ["shift", c] => PerturbationSpec::Shift(uint(c)?),
            ["extra-sqrt"] => PerturbationSpec::ExtraSqrt,
            ["extra-power", e, sc] => PerturbationSpec::ExtraPower {
                exponent: real(e)?,
                scale: real(sc)?,
            },
            ["local-shuffle", w] => PerturbationSpec::LocalShuffle(uint(w)?),
            _ => {
                return Err(format!(
                    "unknown perturbation `{s}`; expected identity, shift:C, extra-sqrt, extra-power:EXP:SCALE or local-shuffle:W"
                ))
            }
        };
        spec.build(0).validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// A flag value or combination rejected before computing.
    Flag {
        flag: &'static str,
        reason: String,
    },
    Compute(parsearch::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Flag { flag, reason } => write!(f, "invalid --{flag}: {reason}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<parsearch::Error> for CliError {
    fn from(e: parsearch::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn flag(flag: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Flag {
        flag,
        reason: reason.into(),
    }
}

/// Rendered output and the names of failed checks; a non-empty failure list
/// means a nonzero exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub failures: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Matrix(args) => cmd_matrix(cli, args),
        Command::Speedup(args) => cmd_speedup(cli, args),
        Command::Robustness(args) => cmd_robustness(cli, args),
        Command::Crash(args) => cmd_crash(cli, args),
        Command::VerifyBounds(args) => cmd_verify_bounds(cli, args),
    }
}

/// `{version, seed, command, results}` with every effective option echoed
/// under `command`.
fn report(cli: &Cli, results: Value) -> String {
    let body = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "command": serde_json::to_value(&cli.command).unwrap_or(Value::Null),
        "results": results,
    });
    let mut out = serde_json::to_string_pretty(&body).unwrap_or_default();
    out.push('\n');
    out
}

fn params(k: u32) -> Result<SearchParams, CliError> {
    SearchParams::new(k).map_err(|e| flag("k", e.to_string()))
}

fn cmd_matrix(cli: &Cli, args: &MatrixArgs) -> Result<Outcome, CliError> {
    if args.xmax == 0 {
        return Err(flag("xmax", "must be at least 1"));
    }
    let cells = args.xmax.checked_mul(args.tmax + 1);
    if cells.is_none_or(|c| c > args.max_cells) {
        return Err(flag(
            "xmax",
            format!(
                "{} x {} cells exceeds --max-cells {}",
                args.xmax,
                args.tmax + 1,
                args.max_cells
            ),
        ));
    }
    let strategy = match args.strategy {
        MatrixStrategy::Algorithm1 => StrategyKind::Algorithm1,
        MatrixStrategy::BlockRandom => StrategyKind::BlockRandom { block_len: args.block },
        MatrixStrategy::Solo => StrategyKind::SoloExhaustive,
    };
    strategy.validate().map_err(|e| flag("block", e.to_string()))?;
    let view = NMatrixView::new(strategy, params(args.k)?)?;

    // Columns are cheap to build incrementally; rows are printed from them.
    let mut columns: Vec<Vec<String>> = Vec::with_capacity(args.tmax as usize + 1);
    let mut numeric: Vec<Vec<f64>> = Vec::new();
    for t in 0..=args.tmax {
        if args.exact {
            columns.push(
                view.exact_column(t, args.xmax)?
                    .iter()
                    .map(matrix::render_rational)
                    .collect(),
            );
        } else {
            let col = (1..=args.xmax)
                .map(|x| view.value(x, t))
                .collect::<Result<Vec<f64>, _>>()?;
            columns.push(col.iter().map(|v| format_sig(*v, 12)).collect());
            numeric.push(col);
        }
    }

    let output = match args.format {
        Format::Csv => {
            let mut out = String::from("x");
            for t in 0..=args.tmax {
                out.push_str(&format!(",{t}"));
            }
            out.push('\n');
            for x in 0..args.xmax as usize {
                out.push_str(&(x + 1).to_string());
                for col in &columns {
                    out.push(',');
                    out.push_str(&col[x]);
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = (0..args.xmax as usize)
                .map(|x| {
                    let values: Vec<Value> = if args.exact {
                        columns.iter().map(|c| Value::from(c[x].clone())).collect()
                    } else {
                        numeric.iter().map(|c| json!(c[x])).collect()
                    };
                    json!({ "x": x + 1, "values": values })
                })
                .collect();
            report(cli, Value::Array(rows))
        }
    };
    Ok(Outcome {
        output,
        failures: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupRecord {
    pub k: u32,
    pub x: u64,
    pub strategy: String,
    pub mode: Mode,
    pub theta: f64,
    pub speedup: f64,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub truncation_t: Option<u64>,
    pub tail_bound: Option<f64>,
}

impl SpeedupRecord {
    pub fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format_sig(v, 12)).unwrap_or_default();
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Mc => "mc",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.x,
            self.strategy,
            mode,
            format_sig(self.theta, 12),
            format_sig(self.speedup, 12),
            opt(self.stderr),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.truncation_t.map(|t| t.to_string()).unwrap_or_default(),
            opt(self.tail_bound),
        )
    }
}

pub fn speedup_records(seed: u64, args: &SpeedupArgs) -> Result<Vec<SpeedupRecord>, CliError> {
    let xs = match &args.x_range {
        Some(range) => range.values(),
        None => args.x.clone(),
    };
    if xs.is_empty() {
        return Err(flag("x", "give --x or --x-range"));
    }
    if xs.contains(&0) {
        return Err(flag("x", "boxes are numbered from 1"));
    }
    if !(args.epsilon > 0.0) {
        return Err(flag("epsilon", "must be positive"));
    }
    let strategy = match args.strategy {
        SpeedupStrategy::Algorithm1 => StrategyKind::Algorithm1,
        SpeedupStrategy::BlockRandom => StrategyKind::BlockRandom { block_len: args.block },
        SpeedupStrategy::Solo => StrategyKind::SoloExhaustive,
        SpeedupStrategy::Coordinated => StrategyKind::CoordinatedPartition,
    };
    strategy.validate().map_err(|e| flag("block", e.to_string()))?;
    let trials = match (args.mode, args.trials) {
        (Mode::Mc, None) => return Err(flag("trials", "required in mc mode")),
        (Mode::Mc, Some(t)) if t < 2 => return Err(flag("trials", "need at least 2")),
        (_, t) => t,
    };
    if args.window && (args.mode == Mode::Mc || strategy != StrategyKind::Algorithm1) {
        return Err(flag("window", "only available in exact mode for algorithm1"));
    }

    let mut records = Vec::new();
    let mut point = 0u64;
    for &k in &args.k {
        let p = params(k)?;
        match args.mode {
            Mode::Exact if strategy == StrategyKind::Algorithm1 => {
                let rows = matrix::speedup_curve(p, &xs, args.epsilon, args.window)?;
                for &x in &xs {
                    let row = rows.iter().find(|r| r.x == x).expect("every x has a row");
                    let theta = row.window_theta.unwrap_or(row.theta);
                    records.push(SpeedupRecord {
                        k,
                        x,
                        strategy: strategy.to_string(),
                        mode: Mode::Exact,
                        theta,
                        speedup: 1.0 / theta,
                        stderr: None,
                        trials: None,
                        truncation_t: Some(row.truncation_t),
                        tail_bound: Some(row.tail_bound),
                    });
                }
            }
            Mode::Exact => {
                for &x in &xs {
                    let est = matrix::expected_time(strategy, p, x, args.epsilon)?;
                    records.push(SpeedupRecord {
                        k,
                        x,
                        strategy: strategy.to_string(),
                        mode: Mode::Exact,
                        theta: est.theta,
                        speedup: est.speedup(),
                        stderr: None,
                        trials: None,
                        truncation_t: Some(est.truncation_t),
                        tail_bound: Some(est.tail_bound),
                    });
                }
            }
            Mode::Mc => {
                let trials = trials.expect("checked above");
                for &x in &xs {
                    let config = TrialConfig::new(p, strategy, x, derive_seed(seed, point));
                    let stats = sim::estimate_speedup(&config, trials)?;
                    records.push(SpeedupRecord {
                        k,
                        x,
                        strategy: strategy.to_string(),
                        mode: Mode::Mc,
                        theta: stats.mean_time / x as f64,
                        speedup: stats.speedup,
                        stderr: Some(stats.stderr),
                        trials: Some(stats.trials),
                        truncation_t: None,
                        tail_bound: None,
                    });
                    point += 1;
                }
            }
        }
    }
    Ok(records)
}

fn cmd_speedup(cli: &Cli, args: &SpeedupArgs) -> Result<Outcome, CliError> {
    let records = speedup_records(cli.seed, args)?;
    let output = match args.format {
        Format::Csv => {
            let mut out = String::from(SPEEDUP_CSV_HEADER);
            out.push('\n');
            for r in &records {
                out.push_str(&r.csv());
                out.push('\n');
            }
            out
        }
        Format::Json => report(cli, serde_json::to_value(&records).unwrap_or(Value::Null)),
    };
    Ok(Outcome {
        output,
        failures: Vec::new(),
    })
}

fn cmd_robustness(cli: &Cli, args: &RobustnessArgs) -> Result<Outcome, CliError> {
    if args.x == 0 {
        return Err(flag("x", "boxes are numbered from 1"));
    }
    if !(0.0..1.0).contains(&args.tolerance) {
        return Err(flag("tolerance", "must lie in [0, 1)"));
    }
    let perturbations: Vec<Perturbation> = args
        .perturbations
        .iter()
        .enumerate()
        .map(|(i, spec)| spec.build(derive_seed(cli.seed, i as u64)))
        .collect();
    let result = sim::robustness_experiment(
        params(args.k)?,
        args.x,
        &perturbations,
        args.trials,
        args.tolerance,
        cli.seed,
    )?;
    let failures = result
        .rows
        .iter()
        .filter(|r| r.violation)
        .map(|r| format!("robustness:{}", r.label))
        .collect();
    Ok(Outcome {
        output: report(cli, json!([result])),
        failures,
    })
}

fn cmd_crash(cli: &Cli, args: &CrashArgs) -> Result<Outcome, CliError> {
    if args.k_prime >= args.k {
        return Err(flag("k-prime", format!("must be below --k {}", args.k)));
    }
    if args.x == 0 {
        return Err(flag("x", "boxes are numbered from 1"));
    }
    let result = sim::crash_experiment(args.k, args.k_prime, args.x, args.trials, cli.seed)?;
    let failures = if result.ci_overlap {
        Vec::new()
    } else {
        vec![format!("crash:k{}_kprime{}_ci_overlap", args.k, args.k_prime)]
    };
    Ok(Outcome {
        output: report(cli, json!([result])),
        failures,
    })
}

fn cmd_verify_bounds(cli: &Cli, args: &VerifyArgs) -> Result<Outcome, CliError> {
    if args.k.is_empty() {
        return Err(flag("k", "give at least one fleet size"));
    }
    if args.k.contains(&0) {
        return Err(flag("k", "fleet sizes start at 1"));
    }
    let options = VerifyOptions {
        x: args.x,
        epsilon: args.epsilon,
        column_t_max: args.column_tmax,
        product_max: args.product_max,
        waterfill_instances: args.waterfill_instances,
        grid_step: args.grid_step,
        seed: cli.seed,
    };
    let checks = verify_bounds(&args.k, &options)?;
    let failed = failures(&checks).into_iter().map(|c| c.name.clone()).collect();
    Ok(Outcome {
        output: report(cli, serde_json::to_value(&checks).unwrap_or(Value::Null)),
        failures: failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("parsearch").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn perturbation_specs_round_trip() {
        for s in [
            "identity",
            "shift:5",
            "extra-sqrt",
            "extra-power:0.5:2",
            "local-shuffle:4",
        ] {
            assert_eq!(s.parse::<PerturbationSpec>().unwrap().to_string(), s);
        }
        assert!("shift".parse::<PerturbationSpec>().is_err());
        assert!("extra-power:1.5:1".parse::<PerturbationSpec>().is_err());
        assert!("wobble:3".parse::<PerturbationSpec>().is_err());
    }

    #[test]
    fn x_ranges() {
        assert_eq!("3:7".parse::<XRange>().unwrap().values(), vec![3, 4, 5, 6, 7]);
        assert_eq!("10:30:10".parse::<XRange>().unwrap().values(), vec![10, 20, 30]);
        assert!("0:5".parse::<XRange>().is_err());
        assert!("5:4".parse::<XRange>().is_err());
        assert!("1:2:0".parse::<XRange>().is_err());
    }

    #[test]
    fn k1_matrix() {
        let out = run(&parse(&["matrix", "--k", "1", "--xmax", "2", "--tmax", "2", "--exact"])).unwrap();
        assert_eq!(out.output, "x,0,1,2\n1,1,1/2,0\n2,1,1/2,0\n");
    }

    #[test]
    fn mc_needs_trials() {
        let err = run(&parse(&["speedup", "--k", "2", "--x", "10", "--mode", "mc"])).unwrap_err();
        assert!(err.to_string().contains("--trials"), "{err}");
    }

    #[test]
    fn cell_cap() {
        let err = run(&parse(&["matrix", "--xmax", "100000", "--tmax", "1000"])).unwrap_err();
        assert!(err.to_string().contains("--xmax"));
        let err = run(&parse(&[
            "matrix",
            "--xmax",
            "10",
            "--tmax",
            "10",
            "--max-cells",
            "100",
        ]))
        .unwrap_err();
        assert!(err.to_string().contains("max-cells"));
    }

    #[test]
    fn x_and_range_conflict() {
        let r = Cli::try_parse_from(["parsearch", "speedup", "--k", "2", "--x", "5", "--x-range", "1:3"]);
        assert!(r.is_err());
    }

    #[test]
    fn exact_rows_follow_input_order() {
        let out = run(&parse(&["speedup", "--k", "2,1", "--x", "30,6"])).unwrap();
        let keys: Vec<(String, String)> = out
            .output
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[1].to_string())
            })
            .collect();
        let want = [("2", "30"), ("2", "6"), ("1", "30"), ("1", "6")];
        assert_eq!(keys, want.map(|(a, b)| (a.to_string(), b.to_string())));
        assert_eq!(out.output.lines().next().unwrap(), SPEEDUP_CSV_HEADER);
    }

    #[test]
    fn json_echoes_defaults() {
        let out = run(&parse(&[
            "--seed", "9", "matrix", "--xmax", "3", "--tmax", "2", "--format", "json",
        ]))
        .unwrap();
        let v: Value = serde_json::from_str(&out.output).unwrap();
        assert_eq!(v["seed"], 9);
        assert_eq!(v["command"]["name"], "matrix");
        assert_eq!(v["command"]["k"], 2);
        assert_eq!(v["command"]["max_cells"], 10_000_000);
        assert_eq!(v["results"][0]["x"], 1);
    }

    #[test]
    fn baselines_in_exact_mode() {
        let out = run(&parse(&[
            "speedup",
            "--k",
            "4",
            "--x",
            "10",
            "--strategy",
            "coordinated",
        ]))
        .unwrap();
        let row: Vec<String> = out
            .output
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(String::from)
            .collect();
        assert_eq!(row[2], "coordinated-partition");
        assert_eq!(row[5], "3.33333333333");
    }
}
