//! Batch experiments from the command line. Every command writes CSV: a
//! comment line recording the invocation, a header row, then data rows in a
//! fixed order.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::Channel;
use crate::de::{de_run, threshold_search, DeConfig, DeError};
use crate::decoder::decode_traced;
use crate::gf::Field;
use crate::ldpc::{DegreeDistribution, TannerGraph};
use crate::pm_models::{pm_exact_counts, ExactBudget, PmError, PmKind, PmModel, DEFAULT_ENUMERATION_CAP};
use crate::sim::{run_trials, CodeSource};
use crate::symset::{parse_set, SymbolSet};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    EnumerationCap(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::EnumerationCap(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl From<PmError> for CliError {
    fn from(e: PmError) -> Self {
        match e {
            PmError::EnumerationCap { .. } => CliError::EnumerationCap(format!("{e}; pass --mc-samples N to sample instead")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DeError> for CliError {
    fn from(e: DeError) -> Self {
        match e {
            DeError::Pm(pm) => pm.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qpec", version, about = "LDPC decoding and density evolution on the q-ary partial erasure channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel capacity over a grid of erasure probabilities.
    Capacity(CapacityArgs),
    /// Density-evolution decoding thresholds per P_m model.
    Threshold(ThresholdArgs),
    /// Density-evolution failure probability per iteration at fixed epsilon.
    Trajectory(TrajectoryArgs),
    /// Monte Carlo transmit/decode experiments.
    Simulate(SimulateArgs),
    /// Sumset-size tables P_m for a tuple of set sizes.
    PmTable(PmTableArgs),
    /// Per-iteration decoder messages for a graph and received word.
    DecodeTrace(DecodeTraceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EpsArgs {
    /// Single erasure probability.
    #[arg(long, conflicts_with = "eps_grid")]
    pub eps: Option<f64>,
    /// Inclusive grid "start:stop:step".
    #[arg(long = "eps-grid")]
    pub eps_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long = "M")]
    pub m: usize,
    #[command(flatten)]
    pub eps: EpsArgs,
    /// Also report bits per channel use.
    #[arg(long)]
    pub bits: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// P_m models, repeatable or comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<PmKind>,
    /// Sample the exact P_m with this many draws when enumeration is too large.
    #[arg(long = "mc-samples")]
    pub mc_samples: Option<usize>,
    /// Largest number of assignments enumerated exhaustively.
    #[arg(long = "enum-cap", default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub enum_cap: u128,
}

impl ModelArgs {
    fn kinds(&self) -> Vec<PmKind> {
        if self.model.is_empty() {
            PmKind::ALL.to_vec()
        } else {
            self.model.clone()
        }
    }

    fn budget(&self, seed: u64) -> ExactBudget {
        match self.mc_samples {
            Some(samples) => ExactBudget::Fallback {
                cap: self.enum_cap,
                samples,
                seed,
            },
            None => ExactBudget::Exhaustive { cap: self.enum_cap },
        }
    }
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub q: usize,
    /// Partial-erasure size; sweeps 2..=q when omitted.
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub dv: usize,
    #[arg(long, default_value_t = 6)]
    pub dc: usize,
    #[command(flatten)]
    pub models: ModelArgs,
    /// Bisection tolerance on epsilon.
    #[arg(long, default_value_t = crate::de::DEFAULT_THRESHOLD_TOL)]
    pub tol: f64,
    #[arg(long = "max-iters", default_value_t = crate::de::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub dv: usize,
    #[arg(long, default_value_t = 6)]
    pub dc: usize,
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub models: ModelArgs,
    #[arg(long = "max-iters", default_value_t = crate::de::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub dv: usize,
    #[arg(long, default_value_t = 6)]
    pub dc: usize,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub eps: EpsArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long = "max-iters", default_value_t = 200)]
    pub max_iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PmTableArgs {
    #[arg(long)]
    pub q: usize,
    /// Comma-separated set sizes, e.g. "2,2".
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Partial-erasure size recorded in the output (default: largest size).
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub models: ModelArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DecodeTraceArgs {
    /// Graph file: header "q n m", then "v_idx c_idx label" per edge.
    #[arg(long)]
    pub graph: PathBuf,
    /// One candidate set per line, e.g. "{0,2,3}".
    #[arg(long)]
    pub received: PathBuf,
    #[arg(long = "max-iters", default_value_t = 100)]
    pub max_iters: usize,
    /// Emit per-iteration histograms of VTC sizes instead of every message.
    #[arg(long)]
    pub summary: bool,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Capacity(a) => &a.common,
            Command::Threshold(a) => &a.common,
            Command::Trajectory(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::PmTable(a) => &a.common,
            Command::DecodeTrace(a) => &a.common,
        }
    }
}

/// Output of one invocation.
#[derive(Debug)]
pub struct RunOutput {
    pub csv: String,
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_from_args<I, T>(argv: I) -> Result<RunOutput, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| invalid(e.to_string()))?;
    let invocation = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let seed = cli.command.common().seed;
    let mut csv = format!("# qpec {invocation} seed={seed}\n");
    csv.push_str(&run(&cli.command)?);
    Ok(RunOutput {
        csv,
        out: cli.command.common().out.clone(),
    })
}

/// Runs a parsed command, returning the header and data rows.
pub fn run(cmd: &Command) -> Result<String, CliError> {
    match cmd {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Trajectory(a) => cmd_trajectory(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::PmTable(a) => cmd_pm_table(a),
        Command::DecodeTrace(a) => cmd_decode_trace(a),
    }
}

fn field(q: usize) -> Result<Arc<Field>, CliError> {
    Field::new(q).map(Arc::new).map_err(|e| invalid(e.to_string()))
}

fn channel(q: usize, m: usize, eps: f64) -> Result<Channel, CliError> {
    Channel::new(field(q)?, m, eps).map_err(|e| invalid(e.to_string()))
}

fn degrees(dv: usize, dc: usize) -> Result<DegreeDistribution, CliError> {
    DegreeDistribution::regular(dv, dc).map_err(|e| invalid(e.to_string()))
}

/// Parses an inclusive grid `"start:stop:step"`.
pub fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = grid
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("bad grid {grid:?}; expected start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(invalid(format!("bad grid {grid:?}; expected start:stop:step")));
    };
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(invalid(format!("bad grid {grid:?}; need step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn eps_values(e: &EpsArgs) -> Result<Vec<f64>, CliError> {
    let values = match (&e.eps, &e.eps_grid) {
        (Some(v), None) => vec![*v],
        (None, Some(g)) => parse_grid(g)?,
        _ => return Err(invalid("give exactly one of --eps or --eps-grid")),
    };
    if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid(format!("epsilon {bad} outside [0, 1]")));
    }
    Ok(values)
}

pub fn cmd_capacity(a: &CapacityArgs) -> Result<String, CliError> {
    let base = channel(a.q, a.m, 0.0)?;
    let mut out = String::from(if a.bits { "q,M,epsilon,capacity,capacity_bits\n" } else { "q,M,epsilon,capacity\n" });
    for eps in eps_values(&a.eps)? {
        let ch = base.with_epsilon(eps).map_err(|e| invalid(e.to_string()))?;
        write!(out, "{},{},{},{}", a.q, a.m, eps, ch.capacity()).unwrap();
        if a.bits {
            write!(out, ",{}", ch.capacity_bits()).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn cmd_threshold(a: &ThresholdArgs) -> Result<String, CliError> {
    let f = field(a.q)?;
    let degrees = degrees(a.dv, a.dc)?;
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(invalid("--tol must be positive"));
    }
    let ms: Vec<usize> = match a.m {
        Some(m) => vec![m],
        None => (2..=a.q).collect(),
    };
    let kinds = a.models.kinds();
    let models: Vec<Arc<PmModel>> = kinds
        .iter()
        .map(|&k| Arc::new(PmModel::with_budget(k, f.clone(), a.models.budget(a.common.seed))))
        .collect();
    let mut cells = Vec::new();
    for &m in &ms {
        let ch = channel(a.q, m, 0.0)?;
        for model in &models {
            let mut cfg = DeConfig::new(ch.clone(), degrees.clone(), model.clone());
            cfg.max_iters = a.max_iters;
            cells.push((m, model.kind(), cfg));
        }
    }
    let results: Vec<Result<f64, DeError>> = cells.par_iter().map(|(_, _, cfg)| threshold_search(cfg, a.tol)).collect();
    let mut out = String::from("q,M,dv,dc,model,epsilon_threshold\n");
    for ((m, kind, _), r) in cells.iter().zip(results) {
        writeln!(out, "{},{},{},{},{},{}", a.q, m, a.dv, a.dc, kind, r?).unwrap();
    }
    Ok(out)
}

pub fn cmd_trajectory(a: &TrajectoryArgs) -> Result<String, CliError> {
    let f = field(a.q)?;
    let ch = channel(a.q, a.m, a.eps)?;
    let degrees = degrees(a.dv, a.dc)?;
    let mut out = String::from("q,M,dv,dc,model,epsilon,iteration,failure_prob\n");
    for kind in a.models.kinds() {
        let pm = Arc::new(PmModel::with_budget(kind, f.clone(), a.models.budget(a.common.seed)));
        let mut cfg = DeConfig::new(ch.clone(), degrees.clone(), pm);
        cfg.max_iters = a.max_iters;
        let run = de_run(&cfg)?;
        for (it, pe) in run.trajectory {
            writeln!(out, "{},{},{},{},{},{},{},{}", a.q, a.m, a.dv, a.dc, kind, a.eps, it, pe).unwrap();
        }
    }
    Ok(out)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let base = channel(a.q, a.m, 0.0)?;
    degrees(a.dv, a.dc)?;
    if !(a.n * a.dv).is_multiple_of(a.dc) {
        return Err(invalid(format!("n*dv = {} is not divisible by dc = {}", a.n * a.dv, a.dc)));
    }
    if a.trials == 0 {
        return Err(invalid("--trials must be at least 1"));
    }
    let mut out = String::from(
        "q,M,dv,dc,n,epsilon,trials,successes,success_rate,avg_iterations,residual_symbol_error_rate\n",
    );
    for eps in eps_values(&a.eps)? {
        let ch = base.with_epsilon(eps).map_err(|e| invalid(e.to_string()))?;
        let source = CodeSource::Ensemble { n: a.n, dv: a.dv, dc: a.dc };
        let r = run_trials(source, &ch, a.trials, a.max_iters, a.common.seed).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.q,
            r.m,
            r.dv,
            r.dc,
            r.n,
            r.epsilon,
            r.trials,
            r.successes,
            r.success_rate(),
            r.avg_iterations,
            r.residual_symbol_error_rate
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_pm_table(a: &PmTableArgs) -> Result<String, CliError> {
    let f = field(a.q)?;
    let sizes_label = a.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
    let m_context = a.m.unwrap_or_else(|| a.sizes.iter().copied().max().unwrap_or(0));
    let mut out = String::from("q,M,sizes,m,probability,model\n");
    for kind in a.models.kinds() {
        let model = PmModel::with_budget(kind, f.clone(), a.models.budget(a.common.seed));
        let dist = if kind == PmKind::Exact && a.models.mc_samples.is_none() {
            // report the enumeration itself, including the q-condition case
            pm_exact_counts(&a.sizes, &f, a.models.enum_cap)?.to_distribution()
        } else {
            model.distribution(&a.sizes)?
        };
        for m in 1..=a.q {
            writeln!(out, "{},{},{},{},{},{}", a.q, m_context, sizes_label, m, dist.get(m), kind).unwrap();
        }
    }
    Ok(out)
}

/// Reads one candidate set per non-comment line.
pub fn parse_received(q: usize, text: &str) -> Result<Vec<SymbolSet>, CliError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| parse_set(q, l).map_err(|e| invalid(format!("received line {line}: {e}"))))
        .collect()
}

pub fn cmd_decode_trace(a: &DecodeTraceArgs) -> Result<String, CliError> {
    let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())));
    let graph_text = read(&a.graph)?;
    let q = graph_text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| invalid("graph file is missing its \"q n m\" header"))?;
    let f = field(q)?;
    let graph = TannerGraph::from_text(&f, &graph_text).map_err(|e| invalid(e.to_string()))?;
    let received = parse_received(q, &read(&a.received)?)?;
    let (outcome, trace) = decode_traced(&graph, &f, &received, a.max_iters).map_err(|e| invalid(e.to_string()))?;

    let mut out = String::new();
    if a.summary {
        out.push_str("iteration");
        for m in 1..=q {
            write!(out, ",vtc_size_{m}").unwrap();
        }
        out.push('\n');
        for it in &trace {
            let mut hist = vec![0usize; q];
            for s in &it.vtc {
                hist[s.len() - 1] += 1;
            }
            write!(out, "{}", it.iteration).unwrap();
            for h in hist {
                write!(out, ",{h}").unwrap();
            }
            out.push('\n');
        }
    } else {
        out.push_str("iteration,message,edge,variable,check,size,set\n");
        for it in &trace {
            for (kind, msgs) in [("ctv", &it.ctv), ("vtc", &it.vtc)] {
                for (id, s) in msgs.iter().enumerate() {
                    let e = &graph.edges()[id];
                    writeln!(out, "{},{},{},{},{},{},\"{}\"", it.iteration, kind, id, e.var, e.check, s.len(), s).unwrap();
                }
            }
            for (var, s) in it.posterior.iter().enumerate() {
                writeln!(out, "{},posterior,,{},,{},\"{}\"", it.iteration, var, s.len(), s).unwrap();
            }
        }
    }
    writeln!(
        out,
        "# status={:?} iterations={} unresolved={}",
        outcome.status,
        outcome.iterations,
        outcome.unresolved()
    )
    .unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("0.2:0.2:0.1").unwrap(), vec![0.2]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn exit_codes() {
        let err = run_from_args(["qpec", "capacity", "--q", "6", "--M", "2", "--eps", "0.1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_from_args(["qpec", "capacity", "--q", "4", "--M", "2"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_from_args(["qpec", "pm-table", "--q", "16", "--sizes", "8,8,8", "--enum-cap", "1000"]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = run_from_args(["qpec", "frobnicate"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
