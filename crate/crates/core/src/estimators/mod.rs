//! Incidence weighting estimators.
//!
//! Every estimator here is an IWE `θ̂ = Σ_{(iκ)∈H_s} W_iκ y_κ / π_i`. The
//! HT estimator uses sample-dependent weights, the HH-type estimators use
//! constant weights, and the priority rule keeps a single edge per motif.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::Design;
use crate::error::{BigsError, Result};
use crate::graph::{BipartiteIncidenceGraph, SampleBig, UnitIx};
use crate::number::{sum, Scalar};

pub mod priority;
pub mod variance;
pub mod weights;

pub use priority::{
    joint_priority_prob, priority_indicator, priority_point_estimate, priority_point_estimate_with, priority_prob,
    priority_variance_estimator, priority_weights, PriorityEstimate,
};
pub use variance::{
    condition_two_residual, condition_two_residual_with, hh_true_variance, hh_variance_estimator, ht_true_variance,
    ht_variance_estimator, priority_true_variance,
};
pub use weights::{constant_weights, ht_share_weights, raw_constant_weights, FrameOrder, WeightScheme, WeightTable};

/// π_i, rejecting zero.
pub(crate) fn unit_probability<S: Scalar>(design: &Design, i: UnitIx) -> Result<S> {
    let pi = design.unit_inclusion_prob::<S>(i)?;
    if pi.is_zero() {
        return Err(BigsError::ZeroProbability(format!("π_i for unit {}", i.0)));
    }
    Ok(pi)
}

/// Σ_{(iκ)∈H_s} W_iκ y_κ / π_i
pub fn iwe_estimate<S: Scalar>(sample: &SampleBig, design: &Design, weights: &WeightTable<S>) -> Result<S> {
    let mut total = S::zero();
    for &(i, k) in sample.edges() {
        let w = weights.require(i, k)?;
        if w.is_zero() {
            continue;
        }
        let y = sample.sampled_motif(k).expect("sample edge motif is sampled").value;
        total = total + w.clone() * S::from_f64(y) / unit_probability::<S>(design, i)?;
    }
    Ok(total)
}

/// z_i = Σ_{κ∈α_i} ω_iκ y_κ for every sampled unit.
pub fn z_values<S: Scalar>(sample: &SampleBig, weights: &WeightTable<S>) -> Result<BTreeMap<UnitIx, S>> {
    let mut z: BTreeMap<UnitIx, S> = sample.units().iter().map(|&i| (i, S::zero())).collect();
    for &(i, k) in sample.edges() {
        let y = sample.sampled_motif(k).expect("sample edge motif is sampled").value;
        let entry = z.get_mut(&i).expect("edge unit is sampled");
        *entry = entry.clone() + weights.require(i, k)?.clone() * S::from_f64(y);
    }
    Ok(z)
}

/// Per-draw estimates τ_r = Σ_{i∈draw r} z_i / p_i under independent draws.
pub fn hh_draw_totals<S: Scalar>(sample: &SampleBig, design: &Design, weights: &WeightTable<S>) -> Result<Vec<S>> {
    let Design::IidDraws(iid) = design else {
        return Err(BigsError::NotApplicable {
            estimator: "per-draw totals".into(),
            reason: "design has no independent draws".into(),
        });
    };
    let z = z_values(sample, weights)?;
    sample
        .draws()
        .iter()
        .map(|draw| {
            let mut tau = S::zero();
            for i in draw {
                let zi = &z[i];
                if zi.is_zero() {
                    continue;
                }
                let p = iid.probabilities()[i.0];
                if p == 0.0 {
                    return Err(BigsError::ZeroProbability(format!("p_i for unit {}", i.0)));
                }
                tau = tau + zi.clone() / S::from_f64(p);
            }
            Ok(tau)
        })
        .collect()
}

/// HH-type estimate with constant weights: Σ_{i∈s} z_i/π_i without
/// replacement, the mean of the per-draw totals under independent draws.
pub fn hh_point_estimate<S: Scalar>(sample: &SampleBig, design: &Design, weights: &WeightTable<S>) -> Result<S> {
    match design {
        Design::Srswor { .. } => {
            let z = z_values(sample, weights)?;
            let mut total = S::zero();
            for (i, zi) in z {
                if !zi.is_zero() {
                    total = total + zi / unit_probability::<S>(design, i)?;
                }
            }
            Ok(total)
        }
        Design::IidDraws(iid) => {
            let taus = hh_draw_totals(sample, design, weights)?;
            Ok(sum(taus) / S::from_int(iid.draws() as i64))
        }
    }
}

/// θ̂_y = Σ_{κ∈Ω_s} y_κ / π_(κ)
pub fn ht_point_estimate<S: Scalar>(sample: &SampleBig, design: &Design) -> Result<S> {
    let mut total = S::zero();
    for motif in sample.motifs() {
        let pi = design.motif_inclusion_prob::<S>(&motif.ancestors)?;
        if pi.is_zero() {
            return Err(BigsError::ZeroProbability(format!("π_(κ) for motif {}", motif.motif.0)));
        }
        total = total + S::from_f64(motif.value) / pi;
    }
    Ok(total)
}

/// How a priority ordering of the frame is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingSpec {
    Natural,
    /// By out-degree |α_i|, smallest first.
    Ascending,
    /// By out-degree |α_i|, largest first.
    Descending,
    /// Uniform random permutation; without a seed the caller's seed is used.
    Random(Option<u64>),
    /// Explicit unit ids, highest priority first.
    Explicit(Vec<String>),
}

impl OrderingSpec {
    pub fn resolve(&self, graph: &BipartiteIncidenceGraph, seed: u64) -> Result<FrameOrder> {
        match self {
            OrderingSpec::Natural => Ok(FrameOrder::natural(graph.frame_size())),
            OrderingSpec::Ascending => Ok(FrameOrder::by_degree(graph, false)),
            OrderingSpec::Descending => Ok(FrameOrder::by_degree(graph, true)),
            OrderingSpec::Random(own) => {
                let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
                rng.set_stream(u64::MAX);
                Ok(FrameOrder::random(graph.frame_size(), &mut rng))
            }
            OrderingSpec::Explicit(ids) => {
                let order = ids.iter().map(|id| graph.unit(id)).collect::<Result<Vec<_>>>()?;
                if order.len() != graph.frame_size() {
                    return Err(BigsError::InvalidOrdering(format!(
                        "{} units listed for a frame of {}",
                        order.len(),
                        graph.frame_size()
                    )));
                }
                FrameOrder::from_permutation(&order, "explicit")
            }
        }
    }
}

impl fmt::Display for OrderingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingSpec::Natural => f.write_str("natural"),
            OrderingSpec::Ascending => f.write_str("ascending"),
            OrderingSpec::Descending => f.write_str("descending"),
            OrderingSpec::Random(None) => f.write_str("random"),
            OrderingSpec::Random(Some(seed)) => write!(f, "random:{seed}"),
            OrderingSpec::Explicit(ids) => write!(f, "order={}", ids.join(">")),
        }
    }
}

/// An estimator named on the command line, before it is bound to a graph.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorSpec {
    Ht,
    HtShare,
    Multiplicity,
    Pida(f64),
    Priority(OrderingSpec),
}

impl EstimatorSpec {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            EstimatorSpec::Pida(g) => Some(*g),
            _ => None,
        }
    }

    /// Parameter string for tabular output, e.g. `gamma=0.5`.
    pub fn params(&self) -> String {
        match self {
            EstimatorSpec::Pida(g) => format!("gamma={g}"),
            EstimatorSpec::Priority(o) => match o {
                OrderingSpec::Explicit(_) => o.to_string(),
                _ => format!("order={o}"),
            },
            _ => String::new(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            EstimatorSpec::Ht => "ht",
            EstimatorSpec::HtShare => "ht_share",
            EstimatorSpec::Multiplicity => "multiplicity",
            EstimatorSpec::Pida(_) => "pida",
            EstimatorSpec::Priority(_) => "priority",
        }
    }

    pub fn is_priority(&self) -> bool {
        matches!(self, EstimatorSpec::Priority(_))
    }

    /// Parses a comma-separated list; blank input gives an empty list.
    pub fn parse_list(list: &str) -> Result<Vec<EstimatorSpec>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }

    pub fn resolve(&self, graph: &BipartiteIncidenceGraph, seed: u64) -> Result<Estimator> {
        let rule = match self {
            EstimatorSpec::Ht => Rule::Ht,
            EstimatorSpec::HtShare => Rule::Iwe(WeightScheme::HtShare),
            EstimatorSpec::Multiplicity => Rule::Iwe(WeightScheme::Multiplicity),
            EstimatorSpec::Pida(gamma) => Rule::Iwe(WeightScheme::Pida { gamma: *gamma }),
            EstimatorSpec::Priority(o) => Rule::Iwe(WeightScheme::Priority {
                ordering: o.resolve(graph, seed)?,
            }),
        };
        Ok(Estimator {
            spec: self.clone(),
            rule,
        })
    }
}

fn parse_gamma(text: &str, full: &str) -> Result<f64> {
    let value = text
        .strip_prefix("gamma=")
        .or_else(|| text.strip_prefix("γ="))
        .or_else(|| text.strip_prefix("g="))
        .unwrap_or(text);
    let gamma: f64 = value
        .parse()
        .map_err(|_| BigsError::UnknownEstimator(full.to_owned()))?;
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(BigsError::UnknownEstimator(full.to_owned()));
    }
    Ok(gamma)
}

fn parse_ordering(text: &str, full: &str) -> Result<OrderingSpec> {
    let text = text.strip_prefix("order=").unwrap_or(text);
    match text {
        "" | "natural" => Ok(OrderingSpec::Natural),
        "ascending" | "asc" => Ok(OrderingSpec::Ascending),
        "descending" | "desc" => Ok(OrderingSpec::Descending),
        "random" => Ok(OrderingSpec::Random(None)),
        _ => {
            if let Some(seed) = text.strip_prefix("random:").or_else(|| text.strip_prefix("random=")) {
                let seed = seed.parse().map_err(|_| BigsError::UnknownEstimator(full.to_owned()))?;
                return Ok(OrderingSpec::Random(Some(seed)));
            }
            if text.contains('>') {
                return Ok(OrderingSpec::Explicit(text.split('>').map(str::to_owned).collect()));
            }
            Err(BigsError::UnknownEstimator(full.to_owned()))
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = BigsError;

    fn from_str(s: &str) -> Result<Self> {
        let full = s.trim();
        let lower = full.to_ascii_lowercase();
        let body = lower.strip_prefix("hh:").unwrap_or(&lower);
        match body {
            "ht" | "horvitz_thompson" => return Ok(EstimatorSpec::Ht),
            "ht_share" | "htshare" => return Ok(EstimatorSpec::HtShare),
            "multiplicity" | "mult" => return Ok(EstimatorSpec::Multiplicity),
            "priority" => return Ok(EstimatorSpec::Priority(OrderingSpec::Natural)),
            _ => {}
        }
        if let Some(rest) = body.strip_prefix("pida:") {
            return Ok(EstimatorSpec::Pida(parse_gamma(rest, full)?));
        }
        if let Some(rest) = full.strip_prefix("priority:") {
            return Ok(EstimatorSpec::Priority(parse_ordering(rest, full)?));
        }
        Err(BigsError::UnknownEstimator(full.to_owned()))
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Pida(g) => write!(f, "pida:{g}"),
            EstimatorSpec::Priority(o) => write!(f, "priority:{o}"),
            other => f.write_str(other.family()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Ht,
    Iwe(WeightScheme),
}

/// An estimator bound to a graph (orderings resolved).
#[derive(Clone, Debug, PartialEq)]
pub struct Estimator {
    pub spec: EstimatorSpec,
    pub rule: Rule,
}

/// One evaluated point estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    pub value: S,
    /// The priority rule met an edge that can never be prioritized.
    pub biased: bool,
}

impl Estimator {
    pub fn from_scheme(scheme: WeightScheme) -> Self {
        let spec = match &scheme {
            WeightScheme::Multiplicity => EstimatorSpec::Multiplicity,
            WeightScheme::Pida { gamma } => EstimatorSpec::Pida(*gamma),
            WeightScheme::HtShare => EstimatorSpec::HtShare,
            WeightScheme::Priority { .. } => EstimatorSpec::Priority(OrderingSpec::Natural),
            WeightScheme::Custom(_) => EstimatorSpec::Multiplicity,
        };
        Estimator {
            spec,
            rule: Rule::Iwe(scheme),
        }
    }

    pub fn ht() -> Self {
        Estimator {
            spec: EstimatorSpec::Ht,
            rule: Rule::Ht,
        }
    }

    pub fn name(&self) -> String {
        match &self.rule {
            Rule::Iwe(WeightScheme::Custom(_)) => "custom".into(),
            _ => self.spec.to_string(),
        }
    }

    /// Err(NotApplicable) when the estimator cannot be used with `design`.
    pub fn check_design(&self, design: &Design) -> Result<()> {
        if let Rule::Iwe(WeightScheme::Priority { ordering }) = &self.rule {
            if !design.is_srswor() {
                return Err(BigsError::NotApplicable {
                    estimator: self.name(),
                    reason: "prioritization probabilities need simple random sampling".into(),
                });
            }
            if ordering.len() != design.frame_size() {
                return Err(BigsError::InvalidOrdering("ordering does not cover the frame".into()));
            }
        }
        Ok(())
    }

    pub fn point<S: Scalar>(&self, sample: &SampleBig, design: &Design) -> Result<Point<S>> {
        self.check_design(design)?;
        let value = match &self.rule {
            Rule::Ht => ht_point_estimate(sample, design)?,
            Rule::Iwe(WeightScheme::HtShare) => {
                let w = ht_share_weights::<S>(sample, design)?;
                iwe_estimate(sample, design, &w)?
            }
            Rule::Iwe(WeightScheme::Priority { ordering }) => {
                let est = priority_point_estimate::<S>(sample, design, ordering)?;
                let biased = est.biased();
                return Ok(Point {
                    value: est.value,
                    biased,
                });
            }
            Rule::Iwe(scheme) => {
                let w = constant_weights::<S, _>(sample, scheme, design)?;
                hh_point_estimate(sample, design, &w)?
            }
        };
        Ok(Point { value, biased: false })
    }

    /// Point estimate with constant weights precomputed on the population
    /// graph; other rules fall back to [`Estimator::point`].
    pub fn point_with<S: Scalar>(
        &self,
        sample: &SampleBig,
        design: &Design,
        population_weights: Option<&WeightTable<S>>,
    ) -> Result<Point<S>> {
        match (&self.rule, population_weights) {
            (Rule::Iwe(scheme), Some(w)) if scheme.is_constant() => Ok(Point {
                value: hh_point_estimate(sample, design, w)?,
                biased: false,
            }),
            _ => self.point(sample, design),
        }
    }

    /// Weights over the whole graph for constant schemes.
    pub fn population_weights<S: Scalar>(
        &self,
        graph: &BipartiteIncidenceGraph,
        design: &Design,
    ) -> Result<Option<WeightTable<S>>> {
        match &self.rule {
            Rule::Iwe(scheme) if scheme.is_constant() => Ok(Some(constant_weights::<S, _>(graph, scheme, design)?)),
            _ => Ok(None),
        }
    }

    pub fn variance_estimate<S: Scalar>(&self, sample: &SampleBig, design: &Design) -> Result<S> {
        self.check_design(design)?;
        match &self.rule {
            Rule::Ht | Rule::Iwe(WeightScheme::HtShare) => ht_variance_estimator(sample, design),
            Rule::Iwe(WeightScheme::Priority { ordering }) => priority_variance_estimator(sample, design, ordering),
            Rule::Iwe(scheme) => {
                let w = constant_weights::<S, _>(sample, scheme, design)?;
                hh_variance_estimator(sample, design, &w)
            }
        }
    }

    /// Design variance from the population graph.
    pub fn true_variance<S: Scalar>(&self, graph: &BipartiteIncidenceGraph, design: &Design) -> Result<S> {
        self.check_design(design)?;
        match &self.rule {
            Rule::Ht | Rule::Iwe(WeightScheme::HtShare) => ht_true_variance(graph, design),
            Rule::Iwe(WeightScheme::Priority { ordering }) => priority_true_variance(graph, design, ordering),
            Rule::Iwe(scheme) => {
                let w = constant_weights::<S, _>(graph, scheme, design)?;
                hh_true_variance(graph, design, &w)
            }
        }
    }

    /// Point estimate, variance estimate and (given the population graph)
    /// true variance in floating point. Failures of the optional parts are
    /// recorded in `diagnostics`.
    pub fn report(
        &self,
        sample: &SampleBig,
        design: &Design,
        graph: Option<&BipartiteIncidenceGraph>,
    ) -> EstimateReport {
        let mut report = EstimateReport {
            estimator: self.name(),
            gamma: self.spec.gamma(),
            point: None,
            variance_estimate: None,
            true_variance: None,
            flags: Vec::new(),
            diagnostics: BTreeMap::new(),
        };
        match self.point::<f64>(sample, design) {
            Ok(p) => {
                report.point = Some(p.value);
                if p.biased {
                    report.flags.push(Flag::BiasedPriority);
                }
            }
            Err(e) => {
                report.flags.push(Flag::Na);
                report.diagnostics.insert("point".into(), e.to_string());
                return report;
            }
        }
        match self.variance_estimate::<f64>(sample, design) {
            Ok(v) => {
                if v < 0.0 {
                    report.flags.push(Flag::NegativeVarest);
                }
                report.variance_estimate = Some(v);
            }
            Err(e) => {
                report.diagnostics.insert("var_est".into(), e.to_string());
            }
        }
        if matches!(self.rule, Rule::Ht | Rule::Iwe(WeightScheme::HtShare)) && !design.is_srswor() {
            report
                .diagnostics
                .insert("var_est".into(), "experimental for independent draws".into());
        }
        if let Some(g) = graph {
            match self.true_variance::<f64>(g, design) {
                Ok(v) => report.true_variance = Some(v),
                Err(e) => {
                    report.diagnostics.insert("true_var".into(), e.to_string());
                }
            }
        }
        report
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    BiasedPriority,
    NegativeVarest,
    Na,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::BiasedPriority => "biased_priority",
            Flag::NegativeVarest => "negative_varest",
            Flag::Na => "na",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Joins flags with `;` in a fixed order.
pub fn format_flags(flags: &[Flag]) -> String {
    let mut flags = flags.to_vec();
    flags.sort();
    flags.dedup();
    flags.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub estimator: String,
    pub gamma: Option<f64>,
    pub point: Option<f64>,
    pub variance_estimate: Option<f64>,
    pub true_variance: Option<f64>,
    pub flags: Vec<Flag>,
    pub diagnostics: BTreeMap<String, String>,
}

impl EstimateReport {
    pub const CSV_HEADER: &'static str = "scenario,estimator,gamma,seed,point,var_est,true_var,flags";

    pub fn csv_row(&self, scenario: &str, seed: Option<u64>) -> String {
        fn cell(x: Option<f64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            scenario,
            self.estimator,
            cell(self.gamma),
            seed.map(|s| s.to_string()).unwrap_or_default(),
            cell(self.point),
            cell(self.variance_estimate),
            cell(self.true_variance),
            format_flags(&self.flags)
        )
    }
}
