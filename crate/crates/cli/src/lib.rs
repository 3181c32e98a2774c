//! Command-line front end for the `bigs` toolkit.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bigs::design::{DesignJson, DEFAULT_ENUMERATION_CAP};
use bigs::estimators::{EstimateReport, Rule};
use bigs::exact::{exact_moments, population_total, priority_support_check, rao_blackwellize};
use bigs::graph::GraphJson;
use bigs::scenarios::{self, ScenarioJson, BUILTIN};
use bigs::{
    BigsError, BipartiteIncidenceGraph, Design, Estimator, EstimatorSpec, Exact, MotifIx, Realization, Scalar,
    WeightScheme,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub mod simulate;

use simulate::{run_simulation, SimulationConfig, DEFAULT_SIMULATION_ESTIMATORS};

pub const DEFAULT_ESTIMATORS: &str = "ht,ht_share,multiplicity,pida:0,pida:0.5,pida:1,pida:2,priority";

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub const INPUT: i32 = 2;
    pub const ENUMERATION_CAP: i32 = 3;
    pub const UNREACHABLE: i32 = 4;

    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: Self::INPUT,
            message: message.into(),
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<BigsError> for CliError {
    fn from(e: BigsError) -> Self {
        let code = match e {
            BigsError::EnumerationCap { .. } => Self::ENUMERATION_CAP,
            BigsError::UnreachableEvent => Self::UNREACHABLE,
            _ => Self::INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "bigs",
    version,
    about = "Design-based estimation under bipartite incidence graph sampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimates from one observed sample, as CSV.
    Estimate(EstimateArgs),
    /// Exact moments by enumerating the sample space, as JSON.
    Oracle(OracleArgs),
    /// Monte Carlo relative efficiency against HT, as CSV.
    Simulate(SimulateArgs),
    /// Rao-Blackwellized estimate given an observed motif set.
    Rb(RbArgs),
    /// Built-in scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in scenario name or scenario JSON file.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Graph JSON file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Design as JSON text, a JSON file, or `srswor:<m>`.
    #[arg(long)]
    pub design: Option<String>,
    /// Replace the design's sample size (or number of draws).
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: Source,
    /// Unit ids `a,b,c`; draws separated by `;`.
    #[arg(long)]
    pub sample: Option<String>,
    #[arg(long)]
    pub estimators: Option<String>,
    /// Seed for random priority orderings.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub estimators: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest sample space to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub estimators: Option<String>,
    /// Sample sizes, e.g. `5,11,17,29`.
    #[arg(long)]
    pub m_grid: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RbArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub estimator: String,
    /// Observed motif ids `k1,k2`.
    #[arg(long)]
    pub motifs: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioAction {
    List,
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Graph, design and recorded samples resolved from the command line.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub name: String,
    pub graph: BipartiteIncidenceGraph,
    pub design: Design,
    pub observed: Vec<Realization>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse_design(text: &str, graph: &BipartiteIncidenceGraph) -> CliResult<Design> {
    if let Some(m) = text.strip_prefix("srswor:") {
        let m = m
            .parse()
            .map_err(|_| CliError::input(format!("bad sample size in `{text}`")))?;
        return Ok(Design::srswor(graph.frame_size(), m)?);
    }
    let json: DesignJson = if text.trim_start().starts_with('{') {
        serde_json::from_str(text)?
    } else {
        read_json(Path::new(text))?
    };
    Ok(Design::from_json(&json, graph)?)
}

pub fn load_inputs(source: &Source) -> CliResult<Inputs> {
    let mut inputs = match (&source.scenario, &source.graph) {
        (Some(name), None) => {
            let sc = if Path::new(name).is_file() {
                scenarios::Scenario::from_json(read_json::<ScenarioJson>(Path::new(name))?)?
            } else {
                scenarios::builtin(name)?
            };
            Inputs {
                name: sc.name,
                graph: sc.graph,
                design: sc.design,
                observed: sc.observed,
            }
        }
        (None, Some(path)) => {
            let graph = BipartiteIncidenceGraph::from_json(read_json::<GraphJson>(path)?)?;
            let text = source
                .design
                .as_deref()
                .ok_or_else(|| CliError::input("--graph needs --design"))?;
            let design = parse_design(text, &graph)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Inputs {
                name,
                graph,
                design,
                observed: Vec::new(),
            }
        }
        (Some(_), Some(_)) => return Err(CliError::input("give either --scenario or --graph, not both")),
        (None, None) => return Err(CliError::input("no input: give --scenario or --graph")),
    };
    if source.scenario.is_some() {
        if let Some(text) = &source.design {
            inputs.design = parse_design(text, &inputs.graph)?;
        }
    }
    if let Some(m) = source.m {
        inputs.design = inputs.design.with_sample_size(m)?;
    }
    Ok(inputs)
}

/// `a,b` is a without-replacement sample (or one unit per draw under
/// independent draws); `a,b;c` lists draws.
pub fn parse_sample(text: &str, inputs: &Inputs) -> CliResult<Realization> {
    let ids = |part: &str| -> CliResult<Vec<bigs::UnitIx>> {
        part.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|id| inputs.graph.unit(id).map_err(CliError::from))
            .collect()
    };
    let realization = if text.contains(';') {
        Realization::Draws(text.split(';').map(ids).collect::<CliResult<_>>()?)
    } else if inputs.design.is_srswor() {
        let mut units = ids(text)?;
        units.sort_unstable();
        units.dedup();
        Realization::Subset(units)
    } else {
        Realization::Draws(ids(text)?.into_iter().map(|i| vec![i]).collect())
    };
    check_sample(&realization, &inputs.design)?;
    Ok(realization)
}

fn check_sample(r: &Realization, design: &Design) -> CliResult<()> {
    let (kind, got) = match r {
        Realization::Subset(s) => ("units", s.len()),
        Realization::Draws(d) => ("draws", d.len()),
    };
    let matches_design = matches!(
        (r, design),
        (Realization::Subset(_), Design::Srswor { .. }) | (Realization::Draws(_), Design::IidDraws(_))
    );
    if !matches_design || got != design.sample_size() {
        return Err(CliError::input(format!(
            "sample has {got} {kind}, but the {} design expects {}",
            design.short_name(),
            design.sample_size()
        )));
    }
    Ok(())
}

fn resolve_estimators(list: &str, graph: &BipartiteIncidenceGraph, seed: u64) -> CliResult<Vec<Estimator>> {
    EstimatorSpec::parse_list(list)?
        .iter()
        .map(|s| s.resolve(graph, seed).map_err(CliError::from))
        .collect()
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(CliError::from),
    }
}

pub fn cmd_estimate(args: &EstimateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let inputs = load_inputs(&args.source)?;
    let sample = match &args.sample {
        Some(text) => parse_sample(text, &inputs)?,
        None => {
            let r = inputs
                .observed
                .first()
                .cloned()
                .ok_or_else(|| CliError::input("no --sample given and the scenario records none"))?;
            check_sample(&r, &inputs.design)?;
            r
        }
    };
    let observed = sample.observe(&inputs.graph)?;
    let list = args.estimators.as_deref().unwrap_or(DEFAULT_ESTIMATORS);
    let estimators = resolve_estimators(list, &inputs.graph, args.seed.unwrap_or(0))?;

    let mut text = String::from(EstimateReport::CSV_HEADER);
    text.push('\n');
    for est in &estimators {
        let report = est.report(&observed, &inputs.design, Some(&inputs.graph));
        for (key, message) in &report.diagnostics {
            writeln!(err, "note: {} {key}: {message}", report.estimator)?;
        }
        text.push_str(&report.csv_row(&inputs.name, args.seed));
        text.push('\n');
    }
    emit(out, args.out.as_deref(), &text)
}

fn scalar_json<S: Scalar + Display>(x: &S) -> Value {
    let v = x.to_f64() + 0.0;
    if S::EXACT {
        json!({ "value": v, "exact": x.to_string() })
    } else {
        json!({ "value": v })
    }
}

fn oracle_entry<S: Scalar + Display>(inputs: &Inputs, est: &Estimator, cap: u128) -> Result<Value, BigsError> {
    let moments = exact_moments::<S>(&inputs.graph, &inputs.design, est, cap)?;
    let theta = population_total::<S>(&inputs.graph);
    let bias = moments.mean.clone() - theta.clone();
    let bias_is_zero = if S::EXACT {
        bias.is_zero()
    } else {
        bias.to_f64().abs() <= 1e-9 * theta.to_f64().abs().max(1.0)
    };
    let mut entry = json!({
        "estimator": est.name(),
        "arithmetic": if S::EXACT { "exact" } else { "float" },
        "mean": scalar_json(&moments.mean),
        "theta": scalar_json(&theta),
        "bias": scalar_json(&bias),
        "bias_is_zero": bias_is_zero,
        "variance": scalar_json(&moments.variance),
        "biased_samples": moments.per_sample.iter().filter(|o| o.biased).count(),
    });
    match est.true_variance::<S>(&inputs.graph, &inputs.design) {
        Ok(formula) => {
            let diff = (moments.variance.clone() - formula.clone()).to_f64().abs();
            entry["formula_variance"] = scalar_json(&formula);
            entry["max_abs_diff"] = json!(diff);
        }
        Err(e) => {
            entry["formula_variance"] = Value::Null;
            entry["max_abs_diff"] = Value::Null;
            entry["formula_error"] = json!(e.to_string());
        }
    }
    if let Rule::Iwe(WeightScheme::Priority { ordering }) = &est.rule {
        let hazards = priority_support_check(&inputs.graph, &inputs.design, ordering)?;
        entry["hazards"] = hazards
            .iter()
            .map(|h| json!({ "motif": inputs.graph.motif_id(h.motif), "unit": inputs.graph.unit_id(h.unit) }))
            .collect();
    }
    Ok(entry)
}

/// Exact arithmetic when every quantity is representable, floats otherwise.
pub fn oracle_report(inputs: &Inputs, estimators: &[Estimator], cap: u128) -> CliResult<Value> {
    let entries = estimators
        .iter()
        .map(|est| match oracle_entry::<Exact>(inputs, est, cap) {
            Err(BigsError::Inexact(_)) => oracle_entry::<f64>(inputs, est, cap),
            other => other,
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "scenario": inputs.name,
        "design": inputs.design.to_json(&inputs.graph),
        "samples": inputs.design.sample_space_size().to_string(),
        "theta": inputs.graph.total(),
        "estimators": entries,
    }))
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let inputs = load_inputs(&args.source)?;
    let list = args.estimators.as_deref().unwrap_or(DEFAULT_ESTIMATORS);
    let estimators = resolve_estimators(list, &inputs.graph, args.seed)?;
    let report = oracle_report(&inputs, &estimators, args.cap)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    emit(out, args.out.as_deref(), &text)
}

pub fn parse_m_grid(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::input(format!("bad sample size `{s}` in --m-grid")))
        })
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let inputs = load_inputs(&args.source)?;
    let m_grid = match &args.m_grid {
        Some(text) => parse_m_grid(text)?,
        None => vec![inputs.design.sample_size()],
    };
    let list = args.estimators.as_deref().unwrap_or(DEFAULT_SIMULATION_ESTIMATORS);
    let config = SimulationConfig {
        scenario: inputs.name,
        graph: inputs.graph,
        design: inputs.design,
        estimators: EstimatorSpec::parse_list(list)?,
        m_grid,
        reps: args.reps,
        seed: args.seed,
        workers: args.workers,
    };
    let table = run_simulation(&config)?;
    emit(out, args.out.as_deref(), &table.to_csv())
}

pub fn cmd_rb(args: &RbArgs, out: &mut dyn Write) -> CliResult<()> {
    let inputs = load_inputs(&args.source)?;
    let est = args
        .estimator
        .parse::<EstimatorSpec>()?
        .resolve(&inputs.graph, args.seed)?;
    let motifs: Vec<MotifIx> = args
        .motifs
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|id| inputs.graph.motif(id))
        .collect::<Result<_, _>>()?;
    let value = match rao_blackwellize::<Exact>(&inputs.graph, &inputs.design, &est, &motifs, args.cap) {
        Err(BigsError::Inexact(_)) => scalar_json(&rao_blackwellize::<f64>(
            &inputs.graph,
            &inputs.design,
            &est,
            &motifs,
            args.cap,
        )?),
        other => scalar_json(&other?),
    };
    let ids: Vec<&str> = motifs.iter().map(|&k| inputs.graph.motif_id(k)).collect();
    let report = json!({ "estimator": est.name(), "observed": ids, "rb": value });
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    Ok(())
}

pub fn cmd_scenario(action: &ScenarioAction, out: &mut dyn Write) -> CliResult<()> {
    match action {
        ScenarioAction::List => {
            for name in BUILTIN {
                let sc = scenarios::builtin(name)?;
                writeln!(
                    out,
                    "{name}\tM={} N={} |H|={} design={}",
                    sc.graph.frame_size(),
                    sc.graph.motif_count(),
                    sc.graph.edge_count(),
                    sc.design.short_name()
                )?;
            }
            writeln!(out, "synthetic:M:N:E:uniform|skewed:SEED\tgenerated graph")?;
            Ok(())
        }
        ScenarioAction::Export { name, out: path } => {
            let sc = scenarios::builtin(name)?;
            let text = serde_json::to_string_pretty(&sc.to_json())? + "\n";
            emit(out, path.as_deref(), &text)
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Rb(a) => cmd_rb(a, out),
        Command::Scenario { action } => cmd_scenario(action, out),
    }
}
