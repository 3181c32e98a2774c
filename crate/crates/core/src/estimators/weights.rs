use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::design::Design;
use crate::error::{BigsError, Result};
use crate::graph::{BipartiteIncidenceGraph, IncidenceView, MotifIx, SampleBig, UnitIx};
use crate::number::{sum, Scalar};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Incidence weights keyed by edge `(unit, motif)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable<S> {
    weights: BTreeMap<(UnitIx, MotifIx), S>,
}

impl<S: Scalar> Default for WeightTable<S> {
    fn default() -> Self {
        WeightTable {
            weights: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> WeightTable<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, unit: UnitIx, motif: MotifIx, weight: S) {
        self.weights.insert((unit, motif), weight);
    }

    pub fn get(&self, unit: UnitIx, motif: MotifIx) -> Option<&S> {
        self.weights.get(&(unit, motif))
    }

    pub fn require(&self, unit: UnitIx, motif: MotifIx) -> Result<&S> {
        self.get(unit, motif).ok_or(BigsError::MissingWeight {
            unit: unit.0,
            motif: motif.0,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitIx, MotifIx, &S)> {
        self.weights.iter().map(|(&(i, k), w)| (i, k, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Σ_i ω_iκ per motif.
    pub fn motif_sums(&self) -> BTreeMap<MotifIx, S> {
        let mut sums: BTreeMap<MotifIx, S> = BTreeMap::new();
        for (&(_, k), w) in &self.weights {
            let entry = sums.entry(k).or_insert_with(S::zero);
            *entry = entry.clone() + w.clone();
        }
        sums
    }
}

/// A permutation of the frame; lower rank means higher priority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameOrder {
    rank: Vec<usize>,
    label: String,
}

impl FrameOrder {
    pub fn natural(frame_size: usize) -> Self {
        FrameOrder {
            rank: (0..frame_size).collect(),
            label: "natural".into(),
        }
    }

    /// `order[0]` gets the highest priority.
    pub fn from_permutation(order: &[UnitIx], label: impl Into<String>) -> Result<Self> {
        let mut rank = vec![usize::MAX; order.len()];
        for (pos, &i) in order.iter().enumerate() {
            if i.0 >= order.len() || rank[i.0] != usize::MAX {
                return Err(BigsError::InvalidOrdering(format!(
                    "not a permutation at position {pos}"
                )));
            }
            rank[i.0] = pos;
        }
        Ok(FrameOrder {
            rank,
            label: label.into(),
        })
    }

    /// Frame sorted by out-degree |α_i|; ties keep frame order.
    pub fn by_degree(graph: &BipartiteIncidenceGraph, descending: bool) -> Self {
        let mut order: Vec<UnitIx> = graph.units().collect();
        if descending {
            order.sort_by_key(|&i| std::cmp::Reverse(graph.degree(i)));
        } else {
            order.sort_by_key(|&i| graph.degree(i));
        }
        let label = if descending { "descending" } else { "ascending" };
        Self::from_permutation(&order, label).expect("sorted frame is a permutation")
    }

    pub fn random<R: Rng + ?Sized>(frame_size: usize, rng: &mut R) -> Self {
        let mut order: Vec<UnitIx> = (0..frame_size).map(UnitIx).collect();
        order.shuffle(rng);
        Self::from_permutation(&order, "random").expect("shuffle is a permutation")
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self, i: UnitIx) -> usize {
        self.rank[i.0]
    }

    /// β^i_κ: ancestors ranked ahead of `i`.
    pub fn ahead_of(&self, ancestors: &[UnitIx], i: UnitIx) -> Vec<UnitIx> {
        ancestors
            .iter()
            .copied()
            .filter(|&j| self.rank(j) < self.rank(i))
            .collect()
    }

    /// The highest-priority unit among `units`.
    pub fn first(&self, units: impl IntoIterator<Item = UnitIx>) -> Option<UnitIx> {
        units.into_iter().min_by_key(|&i| self.rank(i))
    }
}

/// Rule producing incidence weights.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme {
    /// ω_iκ = 1/|β_κ|.
    Multiplicity,
    /// ω_iκ ∝ q_i/|α_i|^γ over β_κ, with q_i the design's selection weight.
    Pida { gamma: f64 },
    /// Sample-dependent weights reproducing the HT estimator.
    HtShare,
    /// Multiplicity weights on the edge prioritized by `ordering`, inflated
    /// by the inverse prioritization probability.
    Priority { ordering: FrameOrder },
    /// Arbitrary constant weights.
    Custom(BTreeMap<(UnitIx, MotifIx), f64>),
}

impl WeightScheme {
    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            WeightScheme::Multiplicity | WeightScheme::Pida { .. } | WeightScheme::Custom(_)
        )
    }

    pub fn label(&self) -> String {
        match self {
            WeightScheme::Multiplicity => "multiplicity".into(),
            WeightScheme::Pida { gamma } => format!("pida:{gamma}"),
            WeightScheme::HtShare => "ht_share".into(),
            WeightScheme::Priority { ordering } => format!("priority:{}", ordering.label()),
            WeightScheme::Custom(_) => "custom".into(),
        }
    }
}

/// Constant weights over every edge into the motifs of `view`, without
/// checking that they sum to one per motif.
pub fn raw_constant_weights<S: Scalar, V: IncidenceView>(
    view: &V,
    scheme: &WeightScheme,
    design: &Design,
) -> Result<WeightTable<S>> {
    let mut table = WeightTable::new();
    for (k, ancestors) in view.motif_ancestry() {
        match scheme {
            WeightScheme::Multiplicity => {
                let w = S::ratio(1, ancestors.len() as i64);
                for &i in ancestors {
                    table.insert(i, k, w.clone());
                }
            }
            WeightScheme::Pida { gamma } => {
                let raw = ancestors
                    .iter()
                    .map(|&i| pida_mass::<S, V>(view, design, i, *gamma))
                    .collect::<Result<Vec<S>>>()?;
                let total = sum(raw.iter().cloned());
                if total.is_zero() {
                    return Err(BigsError::ZeroProbability(format!("PIDA mass of motif {}", k.0)));
                }
                for (&i, w) in ancestors.iter().zip(raw) {
                    table.insert(i, k, w / total.clone());
                }
            }
            WeightScheme::Custom(weights) => {
                for &i in ancestors {
                    if let Some(&w) = weights.get(&(i, k)) {
                        table.insert(i, k, S::from_f64(w));
                    }
                }
            }
            WeightScheme::HtShare | WeightScheme::Priority { .. } => {
                return Err(BigsError::NotApplicable {
                    estimator: scheme.label(),
                    reason: "weights depend on the sample".into(),
                })
            }
        }
    }
    Ok(table)
}

fn pida_mass<S: Scalar, V: IncidenceView>(view: &V, design: &Design, i: UnitIx, gamma: f64) -> Result<S> {
    let q = design.selection_weight::<S>(i)?;
    if gamma == 0.0 {
        return Ok(q);
    }
    let degree = view.unit_degree(i).ok_or(BigsError::UnknownDegree(i.0))?;
    let scale =
        S::degree_power(degree, gamma).ok_or_else(|| BigsError::Inexact(format!("|α|^{gamma} for |α| = {degree}")))?;
    Ok(q / scale)
}

/// Constant weights checked to satisfy Σ_{i∈β_κ} ω_iκ = 1 for every motif
/// (exactly for exact scalars, to 1e-12 otherwise).
pub fn constant_weights<S: Scalar, V: IncidenceView>(
    view: &V,
    scheme: &WeightScheme,
    design: &Design,
) -> Result<WeightTable<S>> {
    let table = raw_constant_weights::<S, V>(view, scheme, design)?;
    let sums = table.motif_sums();
    for (k, _) in view.motif_ancestry() {
        let total = sums.get(&k).cloned().unwrap_or_else(S::zero);
        let ok = if S::EXACT {
            total == S::one()
        } else {
            (total.to_f64() - 1.0).abs() <= WEIGHT_SUM_TOLERANCE
        };
        if !ok {
            return Err(BigsError::WeightSum {
                motif: k.0,
                sum: total.to_f64(),
            });
        }
    }
    Ok(table)
}

/// W_iκ = π_i / (|s_κ| π_(κ)): the unit mass 1/π_(κ) split equally over the
/// realized intersection s_κ = s ∩ β_κ.
pub fn ht_share_weights<S: Scalar>(sample: &SampleBig, design: &Design) -> Result<WeightTable<S>> {
    let mut table = WeightTable::new();
    for motif in sample.motifs() {
        let pi_k = design.motif_inclusion_prob::<S>(&motif.ancestors)?;
        let s_k = sample.intersection(motif);
        let share = S::from_int(s_k.len() as i64) * pi_k;
        for i in s_k {
            let pi_i = design.unit_inclusion_prob::<S>(i)?;
            table.insert(i, motif.motif, pi_i / share.clone());
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Exact;
    use crate::scenarios;

    #[test]
    fn multiplicity_singleton_weight() {
        let g = BipartiteIncidenceGraph::build(["a"], [("k".to_owned(), 2.0)], [("a".into(), "k".into())]).unwrap();
        let d = Design::srswor(1, 1).unwrap();
        let w = constant_weights::<Exact, _>(&g, &WeightScheme::Multiplicity, &d).unwrap();
        assert_eq!(w.get(UnitIx(0), MotifIx(0)), Some(&Exact::one()));
    }

    #[test]
    fn pida_weights_on_line_intercept_sample() {
        let sc = scenarios::becker_lis();
        let sample = sc.observed[0].observe(&sc.graph).unwrap();
        let (s1, s2) = (sc.graph.unit("s1").unwrap(), sc.graph.unit("s2").unwrap());
        let k2 = sc.graph.motif("k2").unwrap();

        let w0 = constant_weights::<Exact, _>(&sample, &WeightScheme::Pida { gamma: 0.0 }, &sc.design).unwrap();
        assert_eq!(w0.get(s1, k2), Some(&Exact::ratio(7, 10)));
        assert_eq!(w0.get(s2, k2), Some(&Exact::ratio(3, 10)));

        let w = constant_weights::<f64, _>(&sample, &WeightScheme::Pida { gamma: 0.5 }, &sc.design).unwrap();
        let expected = (0.4375 / 2f64.sqrt()) / (0.4375 / 2f64.sqrt() + 0.1875);
        assert!((w.get(s1, k2).unwrap() - expected).abs() < 1e-15);
        assert!((w.get(s1, k2).unwrap() - 0.6226).abs() < 5e-5);
    }

    #[test]
    fn pida_needs_degrees_and_representable_powers() {
        let sc = scenarios::becker_lis();
        let sample = sc.observed[0].observe(&sc.graph).unwrap();
        let err = constant_weights::<Exact, _>(&sample, &WeightScheme::Pida { gamma: 1.227 }, &sc.design);
        assert!(matches!(err, Err(BigsError::Inexact(_))));
    }

    #[test]
    fn pida_zero_equals_multiplicity_under_srswor() {
        let sc = scenarios::example1();
        let a = constant_weights::<Exact, _>(&sc.graph, &WeightScheme::Pida { gamma: 0.0 }, &sc.design).unwrap();
        let b = constant_weights::<Exact, _>(&sc.graph, &WeightScheme::Multiplicity, &sc.design).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn custom_weights_must_sum_to_one() {
        let sc = scenarios::example1();
        let (i1, i2) = (UnitIx(0), UnitIx(1));
        let mut custom = BTreeMap::new();
        custom.insert((i1, MotifIx(0)), 0.6);
        custom.insert((i2, MotifIx(0)), 0.6);
        custom.insert((i2, MotifIx(1)), 1.0);
        custom.insert((UnitIx(2), MotifIx(2)), 1.0);
        let err = constant_weights::<f64, _>(&sc.graph, &WeightScheme::Custom(custom), &sc.design);
        assert!(matches!(err, Err(BigsError::WeightSum { motif: 0, .. })));
    }

    #[test]
    fn ht_share_weights_satisfy_unit_mass() {
        let sc = scenarios::example1();
        let sample = sc.graph.observe(&[UnitIx(0), UnitIx(1)]).unwrap();
        let w = ht_share_weights::<Exact>(&sample, &sc.design).unwrap();
        assert_eq!(w.get(UnitIx(0), MotifIx(0)), Some(&Exact::ratio(3, 10)));
        assert_eq!(w.get(UnitIx(1), MotifIx(0)), Some(&Exact::ratio(3, 10)));
        let pi = Exact::ratio(1, 2);
        let mass = Exact::ratio(3, 10) / pi.clone() + Exact::ratio(3, 10) / pi;
        assert_eq!(mass, Exact::ratio(6, 5));

        // |s_κ| = 1: W = π_i/π_(κ)
        let sample = sc.graph.observe(&[UnitIx(0), UnitIx(2)]).unwrap();
        let w = ht_share_weights::<Exact>(&sample, &sc.design).unwrap();
        assert_eq!(
            w.get(UnitIx(0), MotifIx(0)),
            Some(&(Exact::ratio(1, 2) / Exact::ratio(5, 6)))
        );
        assert_eq!(w.get(UnitIx(2), MotifIx(2)), Some(&Exact::one()));
    }

    #[test]
    fn orderings() {
        let sc = scenarios::example1();
        let desc = FrameOrder::by_degree(&sc.graph, true);
        assert_eq!(desc.rank(UnitIx(1)), 0);
        let asc = FrameOrder::by_degree(&sc.graph, false);
        assert_eq!(asc.rank(UnitIx(3)), 0);
        assert!(FrameOrder::from_permutation(&[UnitIx(0), UnitIx(0)], "x").is_err());
        assert_eq!(FrameOrder::natural(4).first([UnitIx(3), UnitIx(1)]), Some(UnitIx(1)));
    }
}
