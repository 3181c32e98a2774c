//! Population and sample bipartite incidence graphs.
//!
//! A [`BipartiteIncidenceGraph`] links sampling units (the frame) to motifs:
//! selecting a unit reveals every motif it points to. Observing an initial
//! sample with [`BipartiteIncidenceGraph::observe`] yields a [`SampleBig`]
//! holding the sample edges together with the full ancestor set of each
//! sampled motif and the out-degree of every such ancestor. Nothing else
//! about the population is carried over, so estimators working from a
//! `SampleBig` only see what ancestral observation provides.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{BigsError, Result};

/// Dense index of a unit in frame order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnitIx(pub usize);

/// Dense index of a motif.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MotifIx(pub usize);

#[derive(Clone, Debug)]
pub struct BipartiteIncidenceGraph {
    unit_ids: Vec<String>,
    motif_ids: Vec<String>,
    values: Vec<f64>,
    unit_lookup: HashMap<String, UnitIx>,
    motif_lookup: HashMap<String, MotifIx>,
    successors: Vec<Vec<MotifIx>>,
    ancestors: Vec<Vec<UnitIx>>,
    edge_count: usize,
}

impl BipartiteIncidenceGraph {
    /// Validates and indexes a graph. `units` order is the frame order.
    pub fn build<U, M, E>(units: U, motifs: M, edges: E) -> Result<Self>
    where
        U: IntoIterator,
        U::Item: Into<String>,
        M: IntoIterator<Item = (String, f64)>,
        E: IntoIterator<Item = (String, String)>,
    {
        let unit_ids: Vec<String> = units.into_iter().map(Into::into).collect();
        let mut unit_lookup = HashMap::with_capacity(unit_ids.len());
        for (i, id) in unit_ids.iter().enumerate() {
            if unit_lookup.insert(id.clone(), UnitIx(i)).is_some() {
                return Err(BigsError::DuplicateId {
                    kind: "unit",
                    id: id.clone(),
                });
            }
        }

        let mut motif_ids = Vec::new();
        let mut values = Vec::new();
        let mut motif_lookup = HashMap::new();
        for (k, (id, y)) in motifs.into_iter().enumerate() {
            if !y.is_finite() {
                return Err(BigsError::NonFiniteValue(id));
            }
            if motif_lookup.insert(id.clone(), MotifIx(k)).is_some() {
                return Err(BigsError::DuplicateId { kind: "motif", id });
            }
            motif_ids.push(id);
            values.push(y);
        }

        let mut pairs = Vec::new();
        for (u, m) in edges {
            let i = *unit_lookup.get(&u).ok_or_else(|| BigsError::UnknownId {
                kind: "unit",
                id: u.clone(),
            })?;
            let k = *motif_lookup.get(&m).ok_or_else(|| BigsError::UnknownId {
                kind: "motif",
                id: m.clone(),
            })?;
            pairs.push((i, k));
        }
        Self::assemble(unit_ids, motif_ids, values, unit_lookup, motif_lookup, pairs)
    }

    /// Builds a graph with generated ids `u{i}` / `k{k}` from index pairs.
    pub fn from_indices(frame_size: usize, values: Vec<f64>, edges: Vec<(UnitIx, MotifIx)>) -> Result<Self> {
        let unit_ids: Vec<String> = (0..frame_size).map(|i| format!("u{i}")).collect();
        let motif_ids: Vec<String> = (0..values.len()).map(|k| format!("k{k}")).collect();
        let unit_lookup = unit_ids.iter().cloned().zip((0..frame_size).map(UnitIx)).collect();
        let motif_lookup = motif_ids.iter().cloned().zip((0..values.len()).map(MotifIx)).collect();
        for (i, k) in &edges {
            if i.0 >= frame_size || k.0 >= values.len() {
                return Err(BigsError::UnknownId {
                    kind: "edge endpoint",
                    id: format!("({}, {})", i.0, k.0),
                });
            }
        }
        if let Some(k) = values.iter().position(|y| !y.is_finite()) {
            return Err(BigsError::NonFiniteValue(motif_ids[k].clone()));
        }
        Self::assemble(unit_ids, motif_ids, values, unit_lookup, motif_lookup, edges)
    }

    fn assemble(
        unit_ids: Vec<String>,
        motif_ids: Vec<String>,
        values: Vec<f64>,
        unit_lookup: HashMap<String, UnitIx>,
        motif_lookup: HashMap<String, MotifIx>,
        mut pairs: Vec<(UnitIx, MotifIx)>,
    ) -> Result<Self> {
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            let (i, k) = w[0];
            return Err(BigsError::DuplicateEdge {
                unit: unit_ids[i.0].clone(),
                motif: motif_ids[k.0].clone(),
            });
        }
        let mut successors = vec![Vec::new(); unit_ids.len()];
        let mut ancestors = vec![Vec::new(); motif_ids.len()];
        for &(i, k) in &pairs {
            successors[i.0].push(k);
            ancestors[k.0].push(i);
        }
        for anc in &mut ancestors {
            anc.sort_unstable();
        }
        if let Some(k) = ancestors.iter().position(Vec::is_empty) {
            return Err(BigsError::UnestimableMotif(motif_ids[k].clone()));
        }
        Ok(BipartiteIncidenceGraph {
            unit_ids,
            motif_ids,
            values,
            unit_lookup,
            motif_lookup,
            successors,
            ancestors,
            edge_count: pairs.len(),
        })
    }

    pub fn frame_size(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn motif_count(&self) -> usize {
        self.motif_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn units(&self) -> impl Iterator<Item = UnitIx> {
        (0..self.unit_ids.len()).map(UnitIx)
    }

    pub fn motifs(&self) -> impl Iterator<Item = MotifIx> {
        (0..self.motif_ids.len()).map(MotifIx)
    }

    /// All edges, sorted by unit then motif.
    pub fn edges(&self) -> impl Iterator<Item = (UnitIx, MotifIx)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.iter().map(move |&k| (UnitIx(i), k)))
    }

    /// α_i
    pub fn successors(&self, i: UnitIx) -> &[MotifIx] {
        &self.successors[i.0]
    }

    /// β_κ, in frame order.
    pub fn ancestors(&self, k: MotifIx) -> &[UnitIx] {
        &self.ancestors[k.0]
    }

    pub fn degree(&self, i: UnitIx) -> usize {
        self.successors[i.0].len()
    }

    pub fn value(&self, k: MotifIx) -> f64 {
        self.values[k.0]
    }

    /// θ = Σ y_κ
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn unit_id(&self, i: UnitIx) -> &str {
        &self.unit_ids[i.0]
    }

    pub fn motif_id(&self, k: MotifIx) -> &str {
        &self.motif_ids[k.0]
    }

    pub fn unit(&self, id: &str) -> Result<UnitIx> {
        self.unit_lookup.get(id).copied().ok_or_else(|| BigsError::UnknownId {
            kind: "unit",
            id: id.to_owned(),
        })
    }

    pub fn motif(&self, id: &str) -> Result<MotifIx> {
        self.motif_lookup.get(id).copied().ok_or_else(|| BigsError::UnknownId {
            kind: "motif",
            id: id.to_owned(),
        })
    }

    pub fn max_ancestor_count(&self) -> usize {
        self.ancestors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Incident-ancestral observation of an initial sample `s`.
    pub fn observe(&self, s: &[UnitIx]) -> Result<SampleBig> {
        self.observe_draws(std::slice::from_ref(&s.to_vec()))
    }

    /// Observation of a with-replacement sample given as a list of draws,
    /// each draw being the set of units it selected.
    pub fn observe_draws(&self, draws: &[Vec<UnitIx>]) -> Result<SampleBig> {
        let mut distinct = BTreeSet::new();
        for draw in draws {
            for &i in draw {
                if i.0 >= self.frame_size() {
                    return Err(BigsError::UnknownId {
                        kind: "unit",
                        id: format!("#{}", i.0),
                    });
                }
                distinct.insert(i);
            }
        }
        let units: Vec<UnitIx> = distinct.into_iter().collect();

        let mut motif_set = BTreeSet::new();
        let mut edges = Vec::new();
        let mut successors = Vec::with_capacity(units.len());
        for &i in &units {
            for &k in &self.successors[i.0] {
                motif_set.insert(k);
                edges.push((i, k));
            }
            successors.push(self.successors[i.0].clone());
        }

        let mut degrees = BTreeMap::new();
        let motifs: Vec<SampledMotif> = motif_set
            .into_iter()
            .map(|k| {
                for &j in &self.ancestors[k.0] {
                    degrees.insert(j, self.successors[j.0].len());
                }
                SampledMotif {
                    motif: k,
                    value: self.values[k.0],
                    ancestors: self.ancestors[k.0].clone(),
                }
            })
            .collect();

        let mut draws: Vec<Vec<UnitIx>> = draws.to_vec();
        for draw in &mut draws {
            draw.sort_unstable();
        }

        Ok(SampleBig {
            units,
            draws,
            motifs,
            edges,
            successors,
            degrees,
        })
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            units: self.unit_ids.clone(),
            motifs: self
                .motif_ids
                .iter()
                .zip(&self.values)
                .map(|(id, &y)| MotifJson { id: id.clone(), y })
                .collect(),
            edges: self
                .edges()
                .map(|(i, k)| (self.unit_ids[i.0].clone(), self.motif_ids[k.0].clone()))
                .collect(),
        }
    }

    pub fn from_json(json: GraphJson) -> Result<Self> {
        Self::build(json.units, json.motifs.into_iter().map(|m| (m.id, m.y)), json.edges)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    pub units: Vec<String>,
    pub motifs: Vec<MotifJson>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MotifJson {
    pub id: String,
    #[serde(default = "unit_value")]
    pub y: f64,
}

fn unit_value() -> f64 {
    1.0
}

/// A motif of the sample graph with its value and full ancestor set.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMotif {
    pub motif: MotifIx,
    pub value: f64,
    pub ancestors: Vec<UnitIx>,
}

/// Sample BIG `(s, Ω_s; H_s)` plus ancestry knowledge.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBig {
    units: Vec<UnitIx>,
    draws: Vec<Vec<UnitIx>>,
    motifs: Vec<SampledMotif>,
    edges: Vec<(UnitIx, MotifIx)>,
    successors: Vec<Vec<MotifIx>>,
    degrees: BTreeMap<UnitIx, usize>,
}

impl SampleBig {
    /// Distinct sampled units `s`, sorted.
    pub fn units(&self) -> &[UnitIx] {
        &self.units
    }

    /// The draws as recorded; a without-replacement sample is a single draw.
    pub fn draws(&self) -> &[Vec<UnitIx>] {
        &self.draws
    }

    /// Ω_s, sorted by motif index.
    pub fn motifs(&self) -> &[SampledMotif] {
        &self.motifs
    }

    pub fn motif_set(&self) -> Vec<MotifIx> {
        self.motifs.iter().map(|m| m.motif).collect()
    }

    /// H_s, sorted by unit then motif.
    pub fn edges(&self) -> &[(UnitIx, MotifIx)] {
        &self.edges
    }

    pub fn contains(&self, i: UnitIx) -> bool {
        self.units.binary_search(&i).is_ok()
    }

    pub fn sampled_motif(&self, k: MotifIx) -> Option<&SampledMotif> {
        self.motifs
            .binary_search_by_key(&k, |m| m.motif)
            .ok()
            .map(|pos| &self.motifs[pos])
    }

    /// α_i for a sampled unit (empty for units outside `s`).
    pub fn successors(&self, i: UnitIx) -> &[MotifIx] {
        match self.units.binary_search(&i) {
            Ok(pos) => &self.successors[pos],
            Err(_) => &[],
        }
    }

    /// |α_i| for every unit in β(Ω_s).
    pub fn ancestor_degree(&self, i: UnitIx) -> Option<usize> {
        self.degrees.get(&i).copied()
    }

    /// β(Ω_s) \ s
    pub fn out_of_sample_ancestors(&self) -> Vec<UnitIx> {
        self.degrees.keys().copied().filter(|&i| !self.contains(i)).collect()
    }

    /// s_κ = s ∩ β_κ
    pub fn intersection(&self, motif: &SampledMotif) -> Vec<UnitIx> {
        motif.ancestors.iter().copied().filter(|&i| self.contains(i)).collect()
    }
}

/// Read access to motif ancestry and ancestor degrees, shared by the
/// population graph and a sample graph.
pub trait IncidenceView {
    fn motif_ancestry(&self) -> Vec<(MotifIx, &[UnitIx])>;
    fn unit_degree(&self, i: UnitIx) -> Option<usize>;
}

impl IncidenceView for BipartiteIncidenceGraph {
    fn motif_ancestry(&self) -> Vec<(MotifIx, &[UnitIx])> {
        self.motifs().map(|k| (k, self.ancestors(k))).collect()
    }
    fn unit_degree(&self, i: UnitIx) -> Option<usize> {
        self.successors.get(i.0).map(Vec::len)
    }
}

impl IncidenceView for SampleBig {
    fn motif_ancestry(&self) -> Vec<(MotifIx, &[UnitIx])> {
        self.motifs.iter().map(|m| (m.motif, m.ancestors.as_slice())).collect()
    }
    fn unit_degree(&self, i: UnitIx) -> Option<usize> {
        self.ancestor_degree(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn example1() -> BipartiteIncidenceGraph {
        BipartiteIncidenceGraph::build(
            ids("i", 4),
            ids("k", 3).into_iter().map(|k| (k, 1.0)),
            [("i1", "k1"), ("i2", "k1"), ("i2", "k2"), ("i3", "k3")].map(|(u, m)| (u.to_owned(), m.to_owned())),
        )
        .unwrap()
    }

    fn unit_set(g: &BipartiteIncidenceGraph, names: &[&str]) -> Vec<UnitIx> {
        names.iter().map(|n| g.unit(n).unwrap()).collect()
    }

    #[test]
    fn builds_example_one() {
        let g = example1();
        let k1 = g.motif("k1").unwrap();
        assert_eq!(g.ancestors(k1), unit_set(&g, &["i1", "i2"]).as_slice());
        assert_eq!(g.degree(g.unit("i4").unwrap()), 0);
        assert_eq!(g.total(), 3.0);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn minimal_graph() {
        let g = BipartiteIncidenceGraph::build(
            ["i".to_owned()],
            [("k".to_owned(), 1.0)],
            [("i".to_owned(), "k".to_owned())],
        )
        .unwrap();
        assert_eq!(g.ancestors(MotifIx(0)), &[UnitIx(0)]);
        assert_eq!(g.successors(UnitIx(0)), &[MotifIx(0)]);
    }

    #[test]
    fn rejects_invalid_graphs() {
        let motif = |id: &str| (id.to_owned(), 1.0);
        let err = BipartiteIncidenceGraph::build(["a", "b"], [motif("k"), motif("orphan")], [("a".into(), "k".into())]);
        assert!(matches!(err, Err(BigsError::UnestimableMotif(id)) if id == "orphan"));

        let err = BipartiteIncidenceGraph::build(["a", "a"], [motif("k")], [("a".into(), "k".into())]);
        assert!(matches!(err, Err(BigsError::DuplicateId { kind: "unit", .. })));

        let err = BipartiteIncidenceGraph::build(["a"], [motif("k")], [("b".into(), "k".into())]);
        assert!(matches!(err, Err(BigsError::UnknownId { kind: "unit", .. })));

        let err = BipartiteIncidenceGraph::build(
            ["a"],
            [motif("k")],
            [("a".into(), "k".into()), ("a".into(), "k".into())],
        );
        assert!(matches!(err, Err(BigsError::DuplicateEdge { .. })));

        let err = BipartiteIncidenceGraph::build(["a"], [("k".to_owned(), f64::NAN)], [("a".into(), "k".into())]);
        assert!(matches!(err, Err(BigsError::NonFiniteValue(_))));
    }

    #[test]
    fn observes_example_one() {
        let g = example1();
        let sample = g.observe(&unit_set(&g, &["i1", "i3"])).unwrap();
        let motifs: Vec<&str> = sample.motifs().iter().map(|m| g.motif_id(m.motif)).collect();
        assert_eq!(motifs, ["k1", "k3"]);
        let edges: Vec<(&str, &str)> = sample
            .edges()
            .iter()
            .map(|&(i, k)| (g.unit_id(i), g.motif_id(k)))
            .collect();
        assert_eq!(edges, [("i1", "k1"), ("i3", "k3")]);
        assert_eq!(sample.out_of_sample_ancestors(), unit_set(&g, &["i2"]));
        assert_eq!(sample.ancestor_degree(g.unit("i2").unwrap()), Some(2));
    }

    #[test]
    fn empty_and_census_samples() {
        let g = example1();
        let empty = g.observe(&[]).unwrap();
        assert!(empty.motifs().is_empty() && empty.edges().is_empty());

        let all: Vec<UnitIx> = g.units().collect();
        let census = g.observe(&all).unwrap();
        assert_eq!(census.motif_set(), g.motifs().collect::<Vec<_>>());
        assert_eq!(census.edges().to_vec(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn rejects_unknown_sample_unit() {
        let g = example1();
        assert!(matches!(g.observe(&[UnitIx(9)]), Err(BigsError::UnknownId { .. })));
    }

    #[test]
    fn json_roundtrip_and_default_value() {
        let g = example1();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back = BipartiteIncidenceGraph::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.to_json(), g.to_json());

        let json: GraphJson =
            serde_json::from_str(r#"{"units":["a"],"motifs":[{"id":"k"}],"edges":[["a","k"]]}"#).unwrap();
        assert_eq!(BipartiteIncidenceGraph::from_json(json).unwrap().value(MotifIx(0)), 1.0);
    }

    fn arb_graph() -> impl Strategy<Value = BipartiteIncidenceGraph> {
        (2usize..8, 1usize..6).prop_flat_map(|(m, n)| {
            let anc = proptest::collection::vec(proptest::collection::btree_set(0..m, 1..=m), n);
            (Just(m), anc).prop_map(|(m, anc)| {
                let edges = anc
                    .iter()
                    .enumerate()
                    .flat_map(|(k, set)| set.iter().map(move |&i| (UnitIx(i), MotifIx(k))))
                    .collect();
                BipartiteIncidenceGraph::from_indices(m, vec![1.0; anc.len()], edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn observation_is_monotone_and_ancestral(
            g in arb_graph(),
            a in proptest::collection::btree_set(0usize..8, 0..4),
            b in proptest::collection::btree_set(0usize..8, 0..4),
        ) {
            let m = g.frame_size();
            let s1: Vec<UnitIx> = a.iter().filter(|&&i| i < m).map(|&i| UnitIx(i)).collect();
            let s2: Vec<UnitIx> = b.iter().filter(|&&i| i < m).map(|&i| UnitIx(i)).collect();
            let mut both = s1.clone();
            both.extend(&s2);
            let o1 = g.observe(&s1).unwrap();
            let o2 = g.observe(&s2).unwrap();
            let o12 = g.observe(&both).unwrap();
            let union: BTreeSet<MotifIx> = o1.motif_set().into_iter().chain(o2.motif_set()).collect();
            prop_assert_eq!(o12.motif_set(), union.into_iter().collect::<Vec<_>>());

            let reachable: BTreeSet<MotifIx> = s1.iter().flat_map(|&i| g.successors(i).to_vec()).collect();
            for m in o1.motifs() {
                prop_assert_eq!(m.ancestors.as_slice(), g.ancestors(m.motif));
                prop_assert!(reachable.contains(&m.motif));
                prop_assert!(!o1.intersection(m).is_empty());
            }
        }
    }
}
