//! Priority-rule estimator: for each sample motif only the edge from its
//! highest-priority sampled ancestor is used, reweighted by the conditional
//! probability that this edge is the one prioritized.
//!
//! Prioritization probabilities have closed forms under SRSWOR only. With
//! `d` ancestors ranked ahead of `i`, the probability that none of them is
//! among the other `m − 1` sampled units is `C(M−1−d, m−1)/C(M−1, m−1)`,
//! computed here as the telescoping product `Π_{t<d} (M−m−t)/(M−1−t)`.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::design::Design;
use crate::error::{BigsError, Result};
use crate::graph::{MotifIx, SampleBig, UnitIx};
use crate::number::Scalar;

use super::weights::{constant_weights, FrameOrder, WeightScheme, WeightTable};
use super::{iwe_estimate, unit_probability};

fn srswor_params(design: &Design, what: &'static str) -> Result<(i64, i64)> {
    match design {
        Design::Srswor { frame, size } => Ok((*frame as i64, *size as i64)),
        Design::IidDraws(_) => Err(BigsError::RequiresSrswor(what)),
    }
}

/// C(n − d, k)/C(n, k) where `n − k = free` units can be left out.
fn avoid_ratio<S: Scalar>(n: i64, free: i64, d: usize) -> S {
    let d = d as i64;
    if d > free {
        return S::zero();
    }
    (0..d).fold(S::one(), |acc, t| acc * S::ratio(free - t, n - t))
}

/// The prioritized unit of each sample motif: I_iκ = 1 iff i = min(s ∩ β_κ).
pub fn priority_indicator(sample: &SampleBig, ordering: &FrameOrder) -> BTreeMap<MotifIx, UnitIx> {
    sample
        .motifs()
        .iter()
        .filter_map(|m| ordering.first(sample.intersection(m)).map(|i| (m.motif, i)))
        .collect()
}

/// p_iκ = Pr(I_iκ = 1 | δ_i = 1).
pub fn priority_prob<S: Scalar>(design: &Design, ancestors: &[UnitIx], i: UnitIx, ordering: &FrameOrder) -> Result<S> {
    let (big_m, m) = srswor_params(design, "priority probability")?;
    let d = ordering.ahead_of(ancestors, i).len();
    Ok(avoid_ratio(big_m - 1, big_m - m, d))
}

/// p_{iκ,jℓ} = Pr(I_iκ I_jℓ = 1 | δ_i δ_j = 1). Returns zero when `i ≠ j`
/// and `m < 2`, where the conditioning event is impossible.
pub fn joint_priority_prob<S: Scalar>(
    design: &Design,
    (i, k, beta_k): (UnitIx, MotifIx, &[UnitIx]),
    (j, l, beta_l): (UnitIx, MotifIx, &[UnitIx]),
    ordering: &FrameOrder,
) -> Result<S> {
    let (big_m, m) = srswor_params(design, "joint priority probability")?;
    let ahead_i = ordering.ahead_of(beta_k, i);
    if k == l {
        return if i == j {
            priority_prob(design, beta_k, i, ordering)
        } else {
            Ok(S::zero())
        };
    }
    if i == j {
        let ahead_l = ordering.ahead_of(beta_l, i);
        let d = ahead_i.iter().chain(&ahead_l).sorted().dedup().count();
        return Ok(avoid_ratio(big_m - 1, big_m - m, d));
    }
    let ahead_j = ordering.ahead_of(beta_l, j);
    if ahead_i.contains(&j) || ahead_j.contains(&i) || m < 2 {
        return Ok(S::zero());
    }
    let d = ahead_i.iter().chain(&ahead_j).sorted().dedup().count();
    Ok(avoid_ratio(big_m - 2, big_m - m, d))
}

/// Sample-dependent weights W_iκ = I_iκ ω_iκ / p_iκ over every sample edge.
pub fn priority_weights<S: Scalar>(
    sample: &SampleBig,
    design: &Design,
    ordering: &FrameOrder,
    base: &WeightTable<S>,
) -> Result<WeightTable<S>> {
    let chosen = priority_indicator(sample, ordering);
    let mut table = WeightTable::new();
    for &(i, k) in sample.edges() {
        let w = if chosen.get(&k) == Some(&i) {
            let motif = sample.sampled_motif(k).expect("sample edge motif is sampled");
            let p = priority_prob::<S>(design, &motif.ancestors, i, ordering)?;
            base.require(i, k)?.clone() / p
        } else {
            S::zero()
        };
        table.insert(i, k, w);
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriorityEstimate<S> {
    pub value: S,
    /// Sample edges whose unit can never be prioritized for that motif.
    pub blocked_edges: Vec<(UnitIx, MotifIx)>,
}

impl<S> PriorityEstimate<S> {
    pub fn biased(&self) -> bool {
        !self.blocked_edges.is_empty()
    }
}

/// Priority-rule estimate with multiplicity base weights.
pub fn priority_point_estimate<S: Scalar>(
    sample: &SampleBig,
    design: &Design,
    ordering: &FrameOrder,
) -> Result<PriorityEstimate<S>> {
    let base = constant_weights::<S, _>(sample, &WeightScheme::Multiplicity, design)?;
    priority_point_estimate_with(sample, design, ordering, &base)
}

pub fn priority_point_estimate_with<S: Scalar>(
    sample: &SampleBig,
    design: &Design,
    ordering: &FrameOrder,
    base: &WeightTable<S>,
) -> Result<PriorityEstimate<S>> {
    let weights = priority_weights(sample, design, ordering, base)?;
    let value = iwe_estimate(sample, design, &weights)?;
    let mut blocked_edges = Vec::new();
    for &(i, k) in sample.edges() {
        let motif = sample.sampled_motif(k).expect("sample edge motif is sampled");
        if priority_prob::<f64>(design, &motif.ancestors, i, ordering)? == 0.0 {
            blocked_edges.push((i, k));
        }
    }
    Ok(PriorityEstimate { value, blocked_edges })
}

/// Unbiased estimator of V(θ̂_p), summed over all pairs of sample edges.
pub fn priority_variance_estimator<S: Scalar>(sample: &SampleBig, design: &Design, ordering: &FrameOrder) -> Result<S> {
    let base = constant_weights::<S, _>(sample, &WeightScheme::Multiplicity, design)?;
    let edges: Vec<(UnitIx, MotifIx, &[UnitIx], S, S)> = sample
        .edges()
        .iter()
        .map(|&(i, k)| {
            let motif = sample.sampled_motif(k).expect("sample edge motif is sampled");
            let p = priority_prob::<S>(design, &motif.ancestors, i, ordering)?;
            if p.is_zero() {
                return Err(BigsError::ZeroPriority { unit: i.0, motif: k.0 });
            }
            let wy = base.require(i, k)?.clone() * S::from_f64(motif.value);
            Ok((i, k, motif.ancestors.as_slice(), p, wy))
        })
        .collect::<Result<_>>()?;

    let mut total = S::zero();
    for (i, k, beta_k, p_i, wy_i) in &edges {
        let pi_i = unit_probability::<S>(design, *i)?;
        for (j, l, beta_l, p_j, wy_j) in &edges {
            let pi_j = unit_probability::<S>(design, *j)?;
            let pi_ij = design.joint_unit_inclusion_prob::<S>(*i, *j)?;
            if pi_ij.is_zero() {
                return Err(BigsError::ZeroProbability(format!(
                    "π_ij for units {} and {}",
                    i.0, j.0
                )));
            }
            let p_joint = joint_priority_prob::<S>(design, (*i, *k, beta_k), (*j, *l, beta_l), ordering)?;
            let ratio = pi_ij.clone() * p_joint / (pi_i.clone() * pi_j * p_i.clone() * p_j.clone());
            total = total + (ratio - S::one()) * wy_i.clone() * wy_j.clone() / pi_ij;
        }
    }
    Ok(total)
}
