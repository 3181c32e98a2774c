//! Monte Carlo harness: repeated draw → observe → estimate over a grid of
//! sample sizes, summarized as MSE relative to the HT estimator.

use std::fmt::Write as _;

use bigs::estimators::{format_flags, Flag, Rule, WeightTable};
use bigs::exact::priority_support_check;
use bigs::{BigsError, BipartiteIncidenceGraph, Design, Estimator, EstimatorSpec, WeightScheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_SIMULATION_ESTIMATORS: &str =
    "ht,pida:0,pida:1,pida:2,priority:random,priority:ascending,priority:descending";

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub scenario: String,
    pub graph: BipartiteIncidenceGraph,
    pub design: Design,
    pub estimators: Vec<EstimatorSpec>,
    pub m_grid: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyRow {
    pub scenario: String,
    pub design: String,
    pub m: usize,
    pub estimator: String,
    pub params: String,
    pub reps: usize,
    pub seed: u64,
    pub mean: Option<f64>,
    pub mse: Option<f64>,
    pub rel_eff: Option<f64>,
    pub flags: Vec<Flag>,
}

impl EfficiencyRow {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EfficiencyTable {
    pub rows: Vec<EfficiencyRow>,
}

impl EfficiencyTable {
    pub const CSV_HEADER: &'static str = "scenario,design,m,estimator,params,R,seed,mean,mse,rel_eff,flags";

    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.scenario,
                r.design,
                r.m,
                r.estimator,
                r.params,
                r.reps,
                r.seed,
                cell(r.mean),
                cell(r.mse),
                cell(r.rel_eff),
                format_flags(&r.flags)
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn row(&self, m: usize, estimator: &str) -> Option<&EfficiencyRow> {
        self.rows.iter().find(|r| r.m == m && r.estimator == estimator)
    }
}

/// Sum in a fixed binary tree so the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Replicate `r` at sample size `m` draws from its own ChaCha8 stream.
pub fn replicate_rng(seed: u64, m: usize, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((m as u64) << 32) | r as u64);
    rng
}

struct Prepared {
    estimator: Estimator,
    weights: Option<WeightTable<f64>>,
    /// Set when the estimator cannot run under this design.
    inapplicable: bool,
    hazard: bool,
}

#[derive(Clone, Copy)]
struct Outcome {
    value: f64,
    biased: bool,
}

pub fn run_simulation(config: &SimulationConfig) -> Result<EfficiencyTable, BigsError> {
    if config.reps == 0 {
        return Err(BigsError::InvalidDesign("at least one replicate is required".into()));
    }
    match config.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| BigsError::InvalidDesign(e.to_string()))?;
            pool.install(|| simulate_grid(config))
        }
        None => simulate_grid(config),
    }
}

fn simulate_grid(config: &SimulationConfig) -> Result<EfficiencyTable, BigsError> {
    let mut table = EfficiencyTable::default();
    for &m in &config.m_grid {
        table.rows.extend(simulate_size(config, m)?);
    }
    Ok(table)
}

fn simulate_size(config: &SimulationConfig, m: usize) -> Result<Vec<EfficiencyRow>, BigsError> {
    let graph = &config.graph;
    let design = config.design.with_sample_size(m)?;
    let theta = graph.total();

    let mut specs = vec![EstimatorSpec::Ht];
    specs.extend(config.estimators.iter().filter(|s| **s != EstimatorSpec::Ht).cloned());
    let prepared = specs
        .iter()
        .map(|spec| {
            let estimator = spec.resolve(graph, config.seed)?;
            let inapplicable = estimator.check_design(&design).is_err();
            let weights = if inapplicable {
                None
            } else {
                estimator.population_weights::<f64>(graph, &design)?
            };
            let hazard = match (&estimator.rule, inapplicable) {
                (Rule::Iwe(WeightScheme::Priority { ordering }), false) => {
                    !priority_support_check(graph, &design, ordering)?.is_empty()
                }
                _ => false,
            };
            Ok(Prepared {
                estimator,
                weights,
                inapplicable,
                hazard,
            })
        })
        .collect::<Result<Vec<_>, BigsError>>()?;

    let replicates: Vec<Vec<Option<Outcome>>> = (0..config.reps)
        .into_par_iter()
        .map(|r| -> Result<Vec<Option<Outcome>>, BigsError> {
            let mut rng = replicate_rng(config.seed, m, r);
            let sample = design.draw_sample(&mut rng)?.observe(graph)?;
            Ok(prepared
                .iter()
                .map(|p| {
                    if p.inapplicable {
                        return None;
                    }
                    p.estimator
                        .point_with::<f64>(&sample, &design, p.weights.as_ref())
                        .ok()
                        .filter(|pt| pt.value.is_finite())
                        .map(|pt| Outcome {
                            value: pt.value,
                            biased: pt.biased,
                        })
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let summaries: Vec<Option<(f64, f64, bool)>> = (0..prepared.len())
        .map(|e| {
            let outcomes: Option<Vec<Outcome>> = replicates.iter().map(|rep| rep[e]).collect();
            outcomes.map(|o| {
                let values: Vec<f64> = o.iter().map(|x| x.value).collect();
                let sq: Vec<f64> = values.iter().map(|v| (v - theta) * (v - theta)).collect();
                let n = values.len() as f64;
                (
                    pairwise_sum(&values) / n,
                    pairwise_sum(&sq) / n,
                    o.iter().any(|x| x.biased),
                )
            })
        })
        .collect();
    let mse_ht = summaries[0].map(|s| s.1);

    let listed: Vec<usize> = (0..prepared.len())
        .filter(|&e| e > 0 || config.estimators.contains(&EstimatorSpec::Ht))
        .collect();
    Ok(listed
        .into_iter()
        .map(|e| {
            let p = &prepared[e];
            let mut flags = Vec::new();
            let (mean, mse, rel_eff) = match summaries[e] {
                Some((mean, mse, biased)) => {
                    if biased || p.hazard {
                        flags.push(Flag::BiasedPriority);
                    }
                    let rel = match mse_ht {
                        Some(h) if h > 0.0 => Some(mse / h),
                        _ => {
                            flags.push(Flag::Na);
                            None
                        }
                    };
                    (Some(mean), Some(mse), rel)
                }
                None => {
                    flags.push(Flag::Na);
                    (None, None, None)
                }
            };
            EfficiencyRow {
                scenario: config.scenario.clone(),
                design: design.short_name(),
                m,
                estimator: p.estimator.name(),
                params: p.estimator.spec.params(),
                reps: config.reps,
                seed: config.seed,
                mean,
                mse,
                rel_eff,
                flags,
            }
        })
        .collect())
}
