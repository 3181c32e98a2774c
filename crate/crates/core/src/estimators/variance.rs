//! True sampling variances and variance estimators.

use std::collections::BTreeMap;

use crate::design::Design;
use crate::error::{BigsError, Result};
use crate::graph::{BipartiteIncidenceGraph, MotifIx, SampleBig, UnitIx};
use crate::number::{sum, Scalar};

use super::priority::{joint_priority_prob, priority_prob, priority_weights};
use super::weights::{constant_weights, ht_share_weights, raw_constant_weights, FrameOrder, WeightScheme, WeightTable};
use super::{hh_draw_totals, unit_probability, z_values};

/// V(θ̂_y) = Σ_κ Σ_ℓ (π_(κℓ)/(π_(κ) π_(ℓ)) − 1) y_κ y_ℓ
pub fn ht_true_variance<S: Scalar>(graph: &BipartiteIncidenceGraph, design: &Design) -> Result<S> {
    let motifs: Vec<MotifIx> = graph.motifs().collect();
    let pi: Vec<S> = motifs
        .iter()
        .map(|&k| design.motif_inclusion_prob::<S>(graph.ancestors(k)))
        .collect::<Result<_>>()?;
    let mut total = S::zero();
    for (a, &k) in motifs.iter().enumerate() {
        let yk = S::from_f64(graph.value(k));
        total = total + (S::one() / pi[a].clone() - S::one()) * yk.clone() * yk.clone();
        for (b, &l) in motifs.iter().enumerate().skip(a + 1) {
            let joint = design.joint_motif_inclusion_prob::<S>((k, graph.ancestors(k)), (l, graph.ancestors(l)))?;
            let delta = joint / (pi[a].clone() * pi[b].clone()) - S::one();
            total = total + S::from_int(2) * delta * yk.clone() * S::from_f64(graph.value(l));
        }
    }
    Ok(total)
}

fn population_z<S: Scalar>(graph: &BipartiteIncidenceGraph, weights: &WeightTable<S>) -> Result<Vec<S>> {
    graph
        .units()
        .map(|i| {
            let mut z = S::zero();
            for &k in graph.successors(i) {
                z = z + weights.require(i, k)?.clone() * S::from_f64(graph.value(k));
            }
            Ok(z)
        })
        .collect()
}

/// Variance of the HH-type estimator with constant weights.
///
/// Without replacement this is Σ_i Σ_j (π_ij/(π_i π_j) − 1) z_i z_j. With
/// single-unit independent draws it is (Σ_i z_i²/p_i − θ²)/n.
pub fn hh_true_variance<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    weights: &WeightTable<S>,
) -> Result<S> {
    let z = population_z(graph, weights)?;
    match design {
        Design::Srswor { .. } => {
            let units: Vec<UnitIx> = graph.units().filter(|i| !z[i.0].is_zero()).collect();
            let pi: Vec<S> = units
                .iter()
                .map(|&i| unit_probability::<S>(design, i))
                .collect::<Result<_>>()?;
            let mut total = S::zero();
            for (a, &i) in units.iter().enumerate() {
                for (b, &j) in units.iter().enumerate() {
                    let pij = design.joint_unit_inclusion_prob::<S>(i, j)?;
                    let delta = pij / (pi[a].clone() * pi[b].clone()) - S::one();
                    total = total + delta * z[i.0].clone() * z[j.0].clone();
                }
            }
            Ok(total)
        }
        Design::IidDraws(iid) => {
            if !iid.is_single_unit() {
                return Err(BigsError::NotApplicable {
                    estimator: "true variance".into(),
                    reason: "draws select several units with unmodelled dependence".into(),
                });
            }
            let mut second = S::zero();
            for i in graph.units() {
                if z[i.0].is_zero() {
                    continue;
                }
                let p = iid.probabilities()[i.0];
                if p == 0.0 {
                    return Err(BigsError::ZeroProbability(format!("p_i for unit {}", i.0)));
                }
                second = second + z[i.0].clone() * z[i.0].clone() / S::from_f64(p);
            }
            let theta = sum(z);
            Ok((second - theta.clone() * theta) / S::from_int(iid.draws() as i64))
        }
    }
}

/// V(θ̂_p) from the pairwise prioritization probabilities. Requires every
/// p_iκ > 0, which is also what makes θ̂_p unbiased.
pub fn priority_true_variance<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    ordering: &FrameOrder,
) -> Result<S> {
    let omega = constant_weights::<S, _>(graph, &WeightScheme::Multiplicity, design)?;
    let mut edges = Vec::with_capacity(graph.edge_count());
    for (i, k) in graph.edges() {
        let beta = graph.ancestors(k);
        let p = priority_prob::<S>(design, beta, i, ordering)?;
        if p.is_zero() {
            return Err(BigsError::ZeroPriority { unit: i.0, motif: k.0 });
        }
        let pi = unit_probability::<S>(design, i)?;
        let wy = omega.require(i, k)?.clone() * S::from_f64(graph.value(k));
        edges.push((i, k, beta, pi * p, wy));
    }
    let theta: S = sum(graph.motifs().map(|k| S::from_f64(graph.value(k))));
    let mut total = S::zero();
    for (i, k, beta_k, scale_i, wy_i) in &edges {
        for (j, l, beta_l, scale_j, wy_j) in &edges {
            let p_joint = joint_priority_prob::<S>(design, (*i, *k, beta_k), (*j, *l, beta_l), ordering)?;
            if p_joint.is_zero() {
                continue;
            }
            let pij = design.joint_unit_inclusion_prob::<S>(*i, *j)?;
            total = total + pij * p_joint / (scale_i.clone() * scale_j.clone()) * wy_i.clone() * wy_j.clone();
        }
    }
    Ok(total - theta.clone() * theta)
}

/// Unbiased variance estimator for the HH-type estimator.
///
/// Without replacement: Σ_{i,j∈s} (π_ij − π_i π_j)/(π_ij π_i π_j) z_i z_j.
/// Independent draws: the between-draw estimator Σ_r (τ_r − τ̄)²/(n(n − 1)).
pub fn hh_variance_estimator<S: Scalar>(sample: &SampleBig, design: &Design, weights: &WeightTable<S>) -> Result<S> {
    match design {
        Design::Srswor { .. } => {
            let z: Vec<(UnitIx, S)> = z_values(sample, weights)?
                .into_iter()
                .filter(|(_, z)| !z.is_zero())
                .collect();
            let mut total = S::zero();
            for (i, zi) in &z {
                let pi_i = unit_probability::<S>(design, *i)?;
                for (j, zj) in &z {
                    let pi_j = unit_probability::<S>(design, *j)?;
                    let pij = design.joint_unit_inclusion_prob::<S>(*i, *j)?;
                    if pij.is_zero() {
                        return Err(BigsError::ZeroProbability(format!(
                            "π_ij for units {} and {}",
                            i.0, j.0
                        )));
                    }
                    let c = (pij.clone() - pi_i.clone() * pi_j.clone()) / (pij * pi_i.clone() * pi_j);
                    total = total + c * zi.clone() * zj.clone();
                }
            }
            Ok(total)
        }
        Design::IidDraws(_) => {
            let taus = hh_draw_totals(sample, design, weights)?;
            let n = taus.len() as i64;
            if n < 2 {
                return Err(BigsError::TooFewDraws);
            }
            let mean = sum(taus.iter().cloned()) / S::from_int(n);
            let ss = sum(taus.into_iter().map(|t| {
                let d = t - mean.clone();
                d.clone() * d
            }));
            Ok(ss / S::from_int(n * (n - 1)))
        }
    }
}

/// Σ_{κ,ℓ∈Ω_s} (π_(κℓ) − π_(κ) π_(ℓ))/(π_(κℓ) π_(κ) π_(ℓ)) y_κ y_ℓ
pub fn ht_variance_estimator<S: Scalar>(sample: &SampleBig, design: &Design) -> Result<S> {
    let motifs = sample.motifs();
    let pi: Vec<S> = motifs
        .iter()
        .map(|m| design.motif_inclusion_prob::<S>(&m.ancestors))
        .collect::<Result<_>>()?;
    let mut total = S::zero();
    for (a, mk) in motifs.iter().enumerate() {
        for (b, ml) in motifs.iter().enumerate() {
            let joint = design.joint_motif_inclusion_prob::<S>((mk.motif, &mk.ancestors), (ml.motif, &ml.ancestors))?;
            if joint.is_zero() {
                return Err(BigsError::ZeroProbability(format!(
                    "π_(κℓ) for motifs {} and {}",
                    mk.motif.0, ml.motif.0
                )));
            }
            let prod = pi[a].clone() * pi[b].clone();
            let c = (joint.clone() - prod.clone()) / (joint * prod);
            total = total + c * S::from_f64(mk.value) * S::from_f64(ml.value);
        }
    }
    Ok(total)
}

/// Σ_{i∈β_κ} E(W_iκ | δ_i = 1) − 1 for every motif.
///
/// Constant schemes need no enumeration. Sample-dependent schemes average
/// the realized weights over the enumerated sample space.
pub fn condition_two_residual<S: Scalar>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    scheme: &WeightScheme,
    cap: u128,
) -> Result<BTreeMap<MotifIx, S>> {
    match scheme {
        WeightScheme::HtShare => condition_two_residual_with(graph, design, cap, |s| ht_share_weights(s, design)),
        WeightScheme::Priority { ordering } => condition_two_residual_with(graph, design, cap, |s| {
            let base = constant_weights::<S, _>(s, &WeightScheme::Multiplicity, design)?;
            priority_weights(s, design, ordering, &base)
        }),
        _ => {
            let sums = raw_constant_weights::<S, _>(graph, scheme, design)?.motif_sums();
            Ok(graph
                .motifs()
                .map(|k| (k, sums.get(&k).cloned().unwrap_or_else(S::zero) - S::one()))
                .collect())
        }
    }
}

/// Residuals for an arbitrary sample-dependent weight rule.
pub fn condition_two_residual_with<S, F>(
    graph: &BipartiteIncidenceGraph,
    design: &Design,
    cap: u128,
    rule: F,
) -> Result<BTreeMap<MotifIx, S>>
where
    S: Scalar,
    F: Fn(&SampleBig) -> Result<WeightTable<S>>,
{
    let mut mass: BTreeMap<(UnitIx, MotifIx), S> = BTreeMap::new();
    for (realization, prob) in design.enumerate_sample_space::<S>(cap)? {
        let sample = realization.observe(graph)?;
        let weights = rule(&sample)?;
        for &(i, k) in sample.edges() {
            let w = weights.require(i, k)?;
            let entry = mass.entry((i, k)).or_insert_with(S::zero);
            *entry = entry.clone() + prob.clone() * w.clone();
        }
    }
    let mut residuals: BTreeMap<MotifIx, S> = graph.motifs().map(|k| (k, -S::one())).collect();
    for ((i, k), m) in mass {
        let pi = unit_probability::<S>(design, i)?;
        let entry = residuals.get_mut(&k).expect("motif of the graph");
        *entry = entry.clone() + m / pi;
    }
    Ok(residuals)
}
