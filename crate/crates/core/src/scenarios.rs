//! Built-in fixtures and the synthetic graph generator.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::design::{Design, DesignJson, Realization};
use crate::error::{BigsError, Result};
use crate::graph::{BipartiteIncidenceGraph, GraphJson, MotifIx, UnitIx};

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub graph: BipartiteIncidenceGraph,
    pub design: Design,
    pub observed: Vec<Realization>,
    /// Published values keyed by `point:<estimator>`, `var:<estimator>`, ...
    pub expected: BTreeMap<String, f64>,
}

pub const BUILTIN: [&str; 4] = ["example1", "acs_thompson", "becker_lis", "priority_hazard"];

fn owned(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|&(a, b)| (a.to_owned(), b.to_owned())).collect()
}

fn unit_set(graph: &BipartiteIncidenceGraph, ids: &[&str]) -> Vec<UnitIx> {
    ids.iter().map(|id| graph.unit(id).expect("fixture unit")).collect()
}

/// Four units, three motifs, y ≡ 1, SRSWOR(4, 2).
pub fn example1() -> Scenario {
    let graph = BipartiteIncidenceGraph::build(
        ["i1", "i2", "i3", "i4"],
        ["k1", "k2", "k3"].map(|k| (k.to_owned(), 1.0)),
        owned(&[("i1", "k1"), ("i2", "k1"), ("i2", "k2"), ("i3", "k3")]),
    )
    .expect("valid fixture");
    let observed = vec![Realization::Subset(unit_set(&graph, &["i1", "i3"]))];
    let expected = [("theta", 3.0), ("point:ht", 3.2)]
        .map(|(k, v)| (k.to_owned(), v))
        .into();
    Scenario {
        name: "example1".into(),
        graph,
        design: Design::srswor(4, 2).unwrap(),
        observed,
        expected,
    }
}

/// Thompson's adaptive cluster sampling example in its ancestral BIGS form:
/// five grids with y = (1, 0, 2, 10, 1000); grids 10 and 1000 form a network
/// and each observes both network motifs. SRSWOR(5, 2).
pub fn acs_thompson() -> Scenario {
    let ids = ["1", "0", "2", "10", "1000"];
    let mut edges: Vec<(String, String)> = ids.iter().map(|&g| (g.to_owned(), g.to_owned())).collect();
    edges.extend(owned(&[("10", "1000"), ("1000", "10")]));
    let graph = BipartiteIncidenceGraph::build(ids, ids.map(|g| (g.to_owned(), g.parse::<f64>().unwrap())), edges)
        .expect("valid fixture");
    let observed = vec![Realization::Subset(unit_set(&graph, &["2", "10"]))];
    let expected = [("theta", 1013.0), ("point:multiplicity", 1267.5)]
        .map(|(k, v)| (k.to_owned(), v))
        .into();
    Scenario {
        name: "acs_thompson".into(),
        graph,
        design: Design::srswor(5, 2).unwrap(),
        observed,
        expected,
    }
}

/// Wolverine line-intercept sample as BIGS from the projection
/// segments: 7 segments with selection probabilities x_i/12, 4 tracks, and
/// four systematic draws, each selecting three segments.
pub fn becker_lis() -> Scenario {
    let segments = ["s1", "s2", "s3", "s4", "s5", "s6", "s7"];
    let graph = BipartiteIncidenceGraph::build(
        segments,
        [("k1", 1.0), ("k2", 2.0), ("k3", 2.0), ("k4", 1.0)].map(|(k, y)| (k.to_owned(), y)),
        owned(&[("s1", "k1"), ("s1", "k2"), ("s2", "k2"), ("s4", "k3"), ("s6", "k4")]),
    )
    .expect("valid fixture");
    // x = (5.25, 2.25, 6, 2.4, 6, 7.05, 7.05); x3, x5, x7 are not pinned down
    let p = vec![0.4375, 0.1875, 0.5, 0.2, 0.5, 0.5875, 0.5875];
    let excl = |mass: f64| (1.0f64 - mass).powi(4);
    let (k1, k2, k3, k4) = (MotifIx(0), MotifIx(1), MotifIx(2), MotifIx(3));
    let mut overrides = BTreeMap::new();
    // π_(14) = 0.88 and π_(34) = π_(3) come from the transect geometry
    overrides.insert((k1, k4), excl(0.4375) + excl(0.5875) - 0.12);
    overrides.insert((k3, k4), excl(0.5875));
    // β2 ∪ β4 carries mass 1.2125; the union term is taken literally
    overrides.insert((k2, k4), excl(1.2125));
    let design = Design::iid_draws(4, p, overrides).expect("valid fixture");
    let a = unit_set(&graph, &["s1", "s5", "s6"]);
    let b = unit_set(&graph, &["s4", "s6", "s7"]);
    let observed = vec![Realization::Draws(vec![a.clone(), a, b.clone(), b])];
    let expected = [
        ("point:ht", 7.57),
        ("point:pida:0", 9.44),
        ("point:multiplicity", 8.99),
        ("point:pida:0.5", 9.27),
        ("var:pida:0", 1.70),
        ("var:multiplicity", 2.46),
        ("var:pida:0.5", 1.97),
        ("pi:k1", 0.90),
        ("pi:k2", 0.98),
        ("pi:k3", 0.59),
        ("pi:k4", 0.97),
        ("pi:k1:k2", 0.90),
        ("pi:k1:k3", 0.51),
        ("pi:k2:k3", 0.57),
        ("pi:k2:k4", 0.95),
        ("pi:k1:k4", 0.88),
        ("pi:k3:k4", 0.59),
    ]
    .map(|(k, v)| (k.to_owned(), v))
    .into();
    Scenario {
        name: "becker_lis".into(),
        graph,
        design,
        observed,
        expected,
    }
}

/// A motif linked to the whole frame (M = 4) plus one singleton motif,
/// under SRSWOR(4, 2): the last unit in frame order never gets priority.
pub fn priority_hazard() -> Scenario {
    let graph = BipartiteIncidenceGraph::build(
        ["i1", "i2", "i3", "i4"],
        [("all", 1.0), ("solo", 1.0)].map(|(k, y)| (k.to_owned(), y)),
        owned(&[
            ("i1", "all"),
            ("i2", "all"),
            ("i3", "all"),
            ("i4", "all"),
            ("i2", "solo"),
        ]),
    )
    .expect("valid fixture");
    let observed = vec![Realization::Subset(unit_set(&graph, &["i3", "i4"]))];
    let expected = [("theta", 2.0)].map(|(k, v)| (k.to_owned(), v)).into();
    Scenario {
        name: "priority_hazard".into(),
        graph,
        design: Design::srswor(4, 2).unwrap(),
        observed,
        expected,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeProfile {
    /// Out-degrees uniform within ±5 of E/M.
    Uniform,
    /// Out-degrees proportional to log-normal(0, 1) draws.
    Skewed,
}

impl std::str::FromStr for DegreeProfile {
    type Err = BigsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(DegreeProfile::Uniform),
            "skewed" => Ok(DegreeProfile::Skewed),
            other => Err(BigsError::Infeasible(format!("unknown degree profile `{other}`"))),
        }
    }
}

impl std::fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DegreeProfile::Uniform => "uniform",
            DegreeProfile::Skewed => "skewed",
        })
    }
}

/// Nudges `degrees` by ±1 steps until they sum to `total`, staying in `0..=cap`.
fn rebalance<R: Rng>(degrees: &mut [usize], total: usize, cap: usize, rng: &mut R) {
    let mut current: usize = degrees.iter().sum();
    while current != total {
        let i = rng.random_range(0..degrees.len());
        if current < total && degrees[i] < cap {
            degrees[i] += 1;
            current += 1;
        } else if current > total && degrees[i] > 0 {
            degrees[i] -= 1;
            current -= 1;
        }
    }
}

fn draw_degrees<R: Rng>(m: usize, n: usize, e: usize, profile: DegreeProfile, rng: &mut R) -> Vec<usize> {
    let mean = e as f64 / m as f64;
    let mut degrees: Vec<usize> = match profile {
        DegreeProfile::Uniform => {
            let lo = (mean - 5.0).round().max(0.0) as usize;
            let hi = ((mean + 5.0).round() as usize).min(n).max(lo);
            (0..m).map(|_| rng.random_range(lo..=hi)).collect()
        }
        DegreeProfile::Skewed => {
            let dist = LogNormal::new(0.0, 1.0).expect("valid log-normal");
            let w: Vec<f64> = (0..m).map(|_| dist.sample(rng)).collect();
            let total: f64 = w.iter().sum();
            w.iter()
                .map(|x| ((x / total * e as f64).round() as usize).min(n))
                .collect()
        }
    };
    rebalance(&mut degrees, e, n, rng);
    degrees
}

/// Random graph with `m` units, `n` motifs (y ≡ 1) and exactly `e` edges.
/// Unit out-degrees follow `profile`; each unit links to distinct motifs
/// chosen uniformly, and motifs left without an ancestor take over an edge
/// from a motif that has several. Design: SRSWOR(m, min(5, m)).
pub fn synthetic_bigraph(m: usize, n: usize, e: usize, profile: DegreeProfile, seed: u64) -> Result<Scenario> {
    if m == 0 || n == 0 || e < n || m.checked_mul(n).is_none_or(|cells| cells < e) {
        return Err(BigsError::Infeasible(format!("M = {m}, N = {n}, E = {e}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = draw_degrees(m, n, e, profile, &mut rng);

    let mut successors: Vec<Vec<usize>> = degrees
        .iter()
        .map(|&d| {
            let mut s = index::sample(&mut rng, n, d).into_vec();
            s.sort_unstable();
            s
        })
        .collect();
    let mut indegree = vec![0usize; n];
    for s in &successors {
        for &k in s {
            indegree[k] += 1;
        }
    }
    for empty in 0..n {
        if indegree[empty] > 0 {
            continue;
        }
        let donors: Vec<(usize, usize)> = successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&k| (i, k)))
            .filter(|&(_, k)| indegree[k] >= 2)
            .collect();
        let (i, k) = donors[rng.random_range(0..donors.len())];
        let pos = successors[i].iter().position(|&x| x == k).expect("donor edge");
        successors[i][pos] = empty;
        indegree[k] -= 1;
        indegree[empty] += 1;
    }

    let edges = successors
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |&k| (UnitIx(i), MotifIx(k))))
        .collect();
    let graph = BipartiteIncidenceGraph::from_indices(m, vec![1.0; n], edges)?;
    Ok(Scenario {
        name: format!("synthetic:{m}:{n}:{e}:{profile}:{seed}"),
        graph,
        design: Design::srswor(m, m.min(5))?,
        observed: Vec::new(),
        expected: BTreeMap::from([("theta".to_owned(), n as f64)]),
    })
}

/// Looks up a built-in scenario, including `synthetic:M:N:E:profile:seed`.
pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "example1" => Ok(example1()),
        "acs_thompson" | "acs" => Ok(acs_thompson()),
        "becker_lis" | "lis" => Ok(becker_lis()),
        "priority_hazard" => Ok(priority_hazard()),
        other => {
            let parts: Vec<&str> = other.split(':').collect();
            if let ["synthetic", m, n, e, profile, seed] = parts.as_slice() {
                let num = |s: &str| {
                    s.parse::<usize>().map_err(|_| BigsError::UnknownId {
                        kind: "scenario",
                        id: other.to_owned(),
                    })
                };
                let seed = seed.parse::<u64>().map_err(|_| BigsError::UnknownId {
                    kind: "scenario",
                    id: other.to_owned(),
                })?;
                return synthetic_bigraph(num(m)?, num(n)?, num(e)?, profile.parse()?, seed);
            }
            Err(BigsError::UnknownId {
                kind: "scenario",
                id: other.to_owned(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealizationJson {
    Subset(Vec<String>),
    Draws(Vec<Vec<String>>),
}

impl RealizationJson {
    pub fn from_realization(r: &Realization, graph: &BipartiteIncidenceGraph) -> Self {
        let ids = |units: &[UnitIx]| units.iter().map(|&i| graph.unit_id(i).to_owned()).collect();
        match r {
            Realization::Subset(s) => RealizationJson::Subset(ids(s)),
            Realization::Draws(d) => RealizationJson::Draws(d.iter().map(|x| ids(x)).collect()),
        }
    }

    pub fn to_realization(&self, graph: &BipartiteIncidenceGraph) -> Result<Realization> {
        let ix = |ids: &[String]| ids.iter().map(|id| graph.unit(id)).collect::<Result<Vec<_>>>();
        Ok(match self {
            RealizationJson::Subset(s) => {
                let mut units = ix(s)?;
                units.sort_unstable();
                units.dedup();
                Realization::Subset(units)
            }
            RealizationJson::Draws(d) => Realization::Draws(d.iter().map(|x| ix(x)).collect::<Result<_>>()?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub name: String,
    #[serde(flatten)]
    pub graph: GraphJson,
    pub design: DesignJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observed: Vec<RealizationJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn to_json(&self) -> ScenarioJson {
        ScenarioJson {
            name: self.name.clone(),
            graph: self.graph.to_json(),
            design: self.design.to_json(&self.graph),
            observed: self
                .observed
                .iter()
                .map(|r| RealizationJson::from_realization(r, &self.graph))
                .collect(),
            expected: self.expected.clone(),
        }
    }

    pub fn from_json(json: ScenarioJson) -> Result<Self> {
        let graph = BipartiteIncidenceGraph::from_json(json.graph)?;
        let design = Design::from_json(&json.design, &graph)?;
        if design.frame_size() != graph.frame_size() {
            return Err(BigsError::InvalidDesign("design frame differs from the graph".into()));
        }
        let observed = json
            .observed
            .iter()
            .map(|r| r.to_realization(&graph))
            .collect::<Result<_>>()?;
        Ok(Scenario {
            name: json.name,
            graph,
            design,
            observed,
            expected: json.expected,
        })
    }

    pub fn theta(&self) -> f64 {
        self.graph.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixture_structure() {
        let ex = example1();
        assert_eq!(ex.graph.ancestors(MotifIx(0)), &[UnitIx(0), UnitIx(1)]);
        assert_eq!(ex.theta(), 3.0);
        assert_eq!(ex.design.sample_space_size(), 6);

        let acs = acs_thompson();
        let k10 = acs.graph.motif("10").unwrap();
        assert_eq!(
            acs.graph.ancestors(k10),
            unit_set(&acs.graph, &["10", "1000"]).as_slice()
        );
        assert_eq!(acs.theta(), 1013.0);

        let lis = becker_lis();
        let k3 = lis.graph.motif("k3").unwrap();
        assert_eq!(lis.graph.value(k3), 2.0);
    }

    #[test]
    fn line_intercept_probabilities() {
        let sc = becker_lis();
        let g = &sc.graph;
        let pi = |k: &str| -> f64 {
            sc.design
                .motif_inclusion_prob(g.ancestors(g.motif(k).unwrap()))
                .unwrap()
        };
        let pair = |a: &str, b: &str| -> f64 {
            let (ka, kb) = (g.motif(a).unwrap(), g.motif(b).unwrap());
            sc.design
                .joint_motif_inclusion_prob((ka, g.ancestors(ka)), (kb, g.ancestors(kb)))
                .unwrap()
        };
        for k in ["k1", "k2", "k3", "k4"] {
            assert!((pi(k) - sc.expected[&format!("pi:{k}")]).abs() < 0.005, "{k}");
        }
        for (a, b) in [
            ("k1", "k2"),
            ("k1", "k3"),
            ("k2", "k3"),
            ("k2", "k4"),
            ("k1", "k4"),
            ("k3", "k4"),
        ] {
            assert!(
                (pair(a, b) - sc.expected[&format!("pi:{a}:{b}")]).abs() < 0.005,
                "{a}{b}"
            );
        }
        assert!((pair("k1", "k4") - 0.88).abs() < 1e-12);
        assert!((pair("k3", "k4") - pi("k3")).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip() {
        for name in BUILTIN {
            let sc = builtin(name).unwrap();
            let text = serde_json::to_string(&sc.to_json()).unwrap();
            let back = Scenario::from_json(serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back.design, sc.design, "{name}");
            assert_eq!(back.observed, sc.observed, "{name}");
            assert_eq!(back.graph.to_json(), sc.graph.to_json());
        }
        assert!(builtin("nope").is_err());
    }

    #[test]
    fn synthetic_basics() {
        let sc = builtin("synthetic:54:310:1200:uniform:3").unwrap();
        assert_eq!(sc.graph.edge_count(), 1200);
        let mean = sc.graph.units().map(|i| sc.graph.degree(i)).sum::<usize>() as f64 / 54.0;
        assert!((mean - 22.2).abs() < 0.05);
        let forced = synthetic_bigraph(6, 40, 40, DegreeProfile::Uniform, 1).unwrap();
        assert!(forced.graph.motifs().all(|k| forced.graph.ancestors(k).len() == 1));
        assert!(synthetic_bigraph(3, 10, 5, DegreeProfile::Uniform, 1).is_err());
        assert!(synthetic_bigraph(2, 3, 7, DegreeProfile::Uniform, 1).is_err());
        let again = builtin("synthetic:54:310:1200:uniform:3").unwrap();
        assert_eq!(again.graph.to_json(), sc.graph.to_json());
    }

    #[test]
    fn skewed_profile_is_skewed() {
        for seed in 0..100 {
            let sc = synthetic_bigraph(54, 310, 1200, DegreeProfile::Skewed, seed).unwrap();
            let mut d: Vec<usize> = sc.graph.units().map(|i| sc.graph.degree(i)).collect();
            d.sort_unstable();
            let median = (d[26] + d[27]) as f64 / 2.0;
            assert!(*d.last().unwrap() as f64 >= 3.0 * median, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn synthetic_invariants(m in 1usize..20, n in 1usize..30, extra in 0usize..60, seed: u64, skewed: bool) {
            let e = (n + extra).min(m * n);
            prop_assume!(e >= n);
            let profile = if skewed { DegreeProfile::Skewed } else { DegreeProfile::Uniform };
            let sc = synthetic_bigraph(m, n, e, profile, seed).unwrap();
            let total: usize = sc.graph.units().map(|i| sc.graph.degree(i)).sum();
            prop_assert_eq!(total, e);
            prop_assert!(sc.graph.motifs().all(|k| !sc.graph.ancestors(k).is_empty()));
        }
    }
}
