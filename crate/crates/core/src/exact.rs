//! Exhaustive enumeration of the sample space: exact moments,
//! Rao-Blackwellization on the observed motif set, and the priority-rule
//! support check.

use std::collections::BTreeMap;

use crate::design::{Design, Realization};
use crate::error::{BigsError, Result};
use crate::estimators::{priority_prob, Estimator, FrameOrder};
use crate::graph::{BipartiteIncidenceGraph, MotifIx, UnitIx};
use crate::number::{sum, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SampleOutcome<S> {
    pub realization: Realization,
    pub motifs: Vec<MotifIx>,
    pub probability: S,
    pub estimate: S,
    pub biased: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactMoments<S> {
    pub mean: S,
    pub variance: S,
    pub per_sample: Vec<SampleOutcome<S>>,
}

impl<S: Scalar> ExactMoments<S> {
    fn from_outcomes(per_sample: Vec<SampleOutcome<S>>) -> Self {
        let mean = sum(per_sample.iter().map(|o| o.probability.clone() * o.estimate.clone()));
        let variance = sum(per_sample.iter().map(|o| {
            let d = o.estimate.clone() - mean.clone();
            o.probability.clone() * d.clone() * d
        }));
        ExactMoments {
            mean,
            variance,
            per_sample,
        }
    }

    /// E(θ̂) − θ
    pub fn bias(&self, graph: &BipartiteIncidenceGraph) -> S {
        self.mean.clone() - population_total(graph)
    }

    pub fn mse(&self, graph: &BipartiteIncidenceGraph) -> S {
        let b = self.bias(graph);
        self.variance.clone() + b.clone() * b
    }
}

pub fn population_total<S: Scalar>(graph: &BipartiteIncidenceGraph) -> S {
    sum(graph.motifs().map(|k| S::from_f64(graph.value(k))))
}

/// Mean and variance of `estimator` over every sample the design can produce.
pub fn exact_moments<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    estimator: &Estimator,
    cap: u128,
) -> Result<ExactMoments<S>> {
    estimator.check_design(design)?;
    let space = design.enumerate_sample_space::<S>(cap)?;
    let mut per_sample = Vec::with_capacity(space.len());
    for (realization, probability) in space {
        let sample = realization.observe(graph)?;
        let point = estimator.point::<S>(&sample, design)?;
        per_sample.push(SampleOutcome {
            realization,
            motifs: sample.motif_set(),
            probability,
            estimate: point.value,
            biased: point.biased,
        });
    }
    Ok(ExactMoments::from_outcomes(per_sample))
}

/// E(θ̂ | Ω_s) for every observable motif set, from enumerated outcomes.
fn conditional_means<S: Scalar>(per_sample: &[SampleOutcome<S>]) -> BTreeMap<Vec<MotifIx>, S> {
    let mut acc: BTreeMap<Vec<MotifIx>, (S, S)> = BTreeMap::new();
    for o in per_sample {
        let entry = acc.entry(o.motifs.clone()).or_insert_with(|| (S::zero(), S::zero()));
        entry.0 = entry.0.clone() + o.probability.clone() * o.estimate.clone();
        entry.1 = entry.1.clone() + o.probability.clone();
    }
    acc.into_iter().map(|(k, (num, den))| (k, num / den)).collect()
}

/// θ̂_RB = E(θ̂ | Ω_s) for an observed motif set.
pub fn rao_blackwellize<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    estimator: &Estimator,
    observed: &[MotifIx],
    cap: u128,
) -> Result<S> {
    let mut observed = observed.to_vec();
    observed.sort_unstable();
    observed.dedup();
    let moments = exact_moments::<S>(graph, design, estimator, cap)?;
    conditional_means(&moments.per_sample)
        .remove(&observed)
        .ok_or(BigsError::UnreachableEvent)
}

/// Moments of the Rao-Blackwellized estimator: each sample's estimate is
/// replaced by the conditional mean over samples with the same Ω_s.
pub fn rao_blackwell_moments<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    estimator: &Estimator,
    cap: u128,
) -> Result<ExactMoments<S>> {
    let moments = exact_moments::<S>(graph, design, estimator, cap)?;
    let means = conditional_means(&moments.per_sample);
    let per_sample = moments
        .per_sample
        .into_iter()
        .map(|mut o| {
            o.estimate = means[&o.motifs].clone();
            o
        })
        .collect();
    Ok(ExactMoments::from_outcomes(per_sample))
}

/// An ancestor that can never be prioritized for a motif.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PriorityHazard {
    pub motif: MotifIx,
    pub unit: UnitIx,
}

/// Every edge (i, κ) with p_iκ = 0. Such edges exist exactly when some motif
/// has |β_κ| > 1 and Pr(|s_κ| ≤ 1) = 0, i.e. m ≥ M − |β_κ| + 2.
pub fn priority_support_check(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    ordering: &FrameOrder,
) -> Result<Vec<PriorityHazard>> {
    let mut hazards = Vec::new();
    for k in graph.motifs() {
        let beta = graph.ancestors(k);
        if beta.len() < 2 {
            continue;
        }
        for &i in beta {
            if priority_prob::<f64>(design, beta, i, ordering)? == 0.0 {
                hazards.push(PriorityHazard { motif: k, unit: i });
            }
        }
    }
    Ok(hazards)
}

/// Smallest SRSWOR sample size at which the priority rule becomes biased on
/// `graph`, if any.
pub fn priority_bias_onset(graph: &BipartiteIncidenceGraph) -> Option<usize> {
    let max_beta = graph.max_ancestor_count();
    let onset = (graph.frame_size() + 2).checked_sub(max_beta)?;
    (max_beta > 1 && onset <= graph.frame_size()).then_some(onset)
}
