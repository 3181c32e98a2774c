//! Initial sampling designs over the frame.
//!
//! Two designs are supported: simple random sampling without replacement
//! and `n` independent draws with unit-specific single-draw probabilities.
//! Every probability is generic over [`Scalar`], so the same closed forms
//! serve exact enumeration checks and fast simulation.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BigsError, Result};
use crate::graph::{BipartiteIncidenceGraph, MotifIx, SampleBig, UnitIx};
use crate::number::{sum, Scalar};

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Design {
    /// Simple random sampling of `size` units out of `frame` without replacement.
    Srswor {
        frame: usize,
        size: usize,
    },
    IidDraws(IidDraws),
}

/// `draws` independent draws; unit `i` is selected on a draw with
/// probability `p[i]`.
///
/// The selection masses need not sum to one over the frame: a draw may pick
/// several units (as a systematic line sample does), in which case
/// exclusion probabilities are only defined for unit sets whose mass stays
/// at most one, and pairs of motifs whose joint exclusion depends on the
/// physical layout are supplied through `overrides` (keyed by ordered motif
/// pair, holding the exclusion probability of the union of ancestor sets).
#[derive(Clone, Debug, PartialEq)]
pub struct IidDraws {
    draws: usize,
    p: Vec<f64>,
    overrides: BTreeMap<(MotifIx, MotifIx), f64>,
}

impl IidDraws {
    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn overrides(&self) -> &BTreeMap<(MotifIx, MotifIx), f64> {
        &self.overrides
    }

    /// True when each draw selects exactly one unit.
    pub fn is_single_unit(&self) -> bool {
        (self.p.iter().sum::<f64>() - 1.0).abs() <= MASS_TOLERANCE
    }

    fn require_single_unit(&self) -> Result<()> {
        if self.is_single_unit() {
            Ok(())
        } else {
            Err(BigsError::InvalidDesign(format!(
                "single-unit draws need selection probabilities summing to 1, got {}",
                self.p.iter().sum::<f64>()
            )))
        }
    }
}

/// One outcome of the design.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Realization {
    /// A without-replacement sample.
    Subset(Vec<UnitIx>),
    /// Ordered draws; each draw holds the units it selected.
    Draws(Vec<Vec<UnitIx>>),
}

impl Realization {
    pub fn observe(&self, graph: &BipartiteIncidenceGraph) -> Result<SampleBig> {
        match self {
            Realization::Subset(s) => graph.observe(s),
            Realization::Draws(draws) => graph.observe_draws(draws),
        }
    }

    pub fn distinct_units(&self) -> Vec<UnitIx> {
        let mut units: Vec<UnitIx> = match self {
            Realization::Subset(s) => s.clone(),
            Realization::Draws(d) => d.iter().flatten().copied().collect(),
        };
        units.sort_unstable();
        units.dedup();
        units
    }
}

impl Design {
    pub fn srswor(frame: usize, size: usize) -> Result<Self> {
        if size == 0 || size > frame {
            return Err(BigsError::InvalidDesign(format!(
                "sample size {size} must lie in 1..={frame}"
            )));
        }
        Ok(Design::Srswor { frame, size })
    }

    pub fn iid_draws(draws: usize, p: Vec<f64>, overrides: BTreeMap<(MotifIx, MotifIx), f64>) -> Result<Self> {
        if draws == 0 {
            return Err(BigsError::InvalidDesign("at least one draw is required".into()));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(BigsError::InvalidDesign(format!(
                "selection probability {bad} outside [0, 1]"
            )));
        }
        let mut normalized = BTreeMap::new();
        for ((a, b), v) in overrides {
            if !(0.0..=1.0).contains(&v) {
                return Err(BigsError::InvalidDesign(format!("override {v} outside [0, 1]")));
            }
            normalized.insert((a.min(b), a.max(b)), v);
        }
        Ok(Design::IidDraws(IidDraws {
            draws,
            p,
            overrides: normalized,
        }))
    }

    pub fn frame_size(&self) -> usize {
        match self {
            Design::Srswor { frame, .. } => *frame,
            Design::IidDraws(d) => d.p.len(),
        }
    }

    /// `m` for SRSWOR, the number of draws otherwise.
    pub fn sample_size(&self) -> usize {
        match self {
            Design::Srswor { size, .. } => *size,
            Design::IidDraws(d) => d.draws,
        }
    }

    pub fn with_sample_size(&self, size: usize) -> Result<Design> {
        match self {
            Design::Srswor { frame, .. } => Design::srswor(*frame, size),
            Design::IidDraws(d) => Design::iid_draws(size, d.p.clone(), d.overrides.clone()),
        }
    }

    pub fn is_srswor(&self) -> bool {
        matches!(self, Design::Srswor { .. })
    }

    pub fn short_name(&self) -> String {
        match self {
            Design::Srswor { .. } => "srswor".into(),
            Design::IidDraws(_) => "iid_draws".into(),
        }
    }

    fn check_unit(&self, i: UnitIx) -> Result<()> {
        if i.0 < self.frame_size() {
            Ok(())
        } else {
            Err(BigsError::UnknownId {
                kind: "unit",
                id: format!("#{}", i.0),
            })
        }
    }

    /// π_i
    pub fn unit_inclusion_prob<S: Scalar>(&self, i: UnitIx) -> Result<S> {
        self.check_unit(i)?;
        Ok(match self {
            Design::Srswor { frame, size } => S::ratio(*size as i64, *frame as i64),
            Design::IidDraws(d) => S::one() - (S::one() - S::from_f64(d.p[i.0])).powi(d.draws as u32),
        })
    }

    /// π_ij, with π_ii = π_i.
    pub fn joint_unit_inclusion_prob<S: Scalar>(&self, i: UnitIx, j: UnitIx) -> Result<S> {
        if i == j {
            return self.unit_inclusion_prob(i);
        }
        self.check_unit(i)?;
        self.check_unit(j)?;
        Ok(match self {
            Design::Srswor { frame, size } => {
                let (m, big_m) = (*size as i64, *frame as i64);
                S::ratio(m * (m - 1), big_m * (big_m - 1))
            }
            Design::IidDraws(d) => {
                let n = d.draws as u32;
                let (pi, pj) = (d.p[i.0], d.p[j.0]);
                if pi + pj > 1.0 + MASS_TOLERANCE {
                    return Err(BigsError::ExcessSelectionMass { mass: pi + pj });
                }
                let (pi, pj) = (S::from_f64(pi), S::from_f64(pj));
                let one = S::one();
                one.clone() - (one.clone() - pi.clone()).powi(n) - (one.clone() - pj.clone()).powi(n)
                    + (one - pi - pj).powi(n)
            }
        })
    }

    /// π̄_B = Pr(B ∩ s = ∅).
    pub fn exclusion_prob<S: Scalar>(&self, set: &[UnitIx]) -> Result<S> {
        for &i in set {
            self.check_unit(i)?;
        }
        match self {
            Design::Srswor { frame, size } => {
                // C(M − b, m) / C(M, m) = Π_{t<b} (M − m − t)/(M − t)
                let (big_m, m) = (*frame as i64, *size as i64);
                let b = set.len() as i64;
                if big_m - m < b {
                    return Ok(S::zero());
                }
                Ok((0..b).fold(S::one(), |acc, t| acc * S::ratio(big_m - m - t, big_m - t)))
            }
            Design::IidDraws(d) => {
                let mass: f64 = set.iter().map(|i| d.p[i.0]).sum();
                if mass > 1.0 + MASS_TOLERANCE {
                    return Err(BigsError::ExcessSelectionMass { mass });
                }
                let mass: S = sum(set.iter().map(|i| S::from_f64(d.p[i.0])));
                Ok((S::one() - mass).powi(d.draws as u32))
            }
        }
    }

    /// π_(κ) = 1 − π̄_{β_κ}
    pub fn motif_inclusion_prob<S: Scalar>(&self, ancestors: &[UnitIx]) -> Result<S> {
        Ok(S::one() - self.exclusion_prob::<S>(ancestors)?)
    }

    /// π_(κℓ) = 1 − (π̄_{β_κ} + π̄_{β_ℓ} − π̄_{β_κ ∪ β_ℓ}).
    pub fn joint_motif_inclusion_prob<S: Scalar>(
        &self,
        (k, beta_k): (MotifIx, &[UnitIx]),
        (l, beta_l): (MotifIx, &[UnitIx]),
    ) -> Result<S> {
        if k == l {
            return self.motif_inclusion_prob(beta_k);
        }
        let excl_k = self.exclusion_prob::<S>(beta_k)?;
        let excl_l = self.exclusion_prob::<S>(beta_l)?;
        let override_value = match self {
            Design::IidDraws(d) => d.overrides.get(&(k.min(l), k.max(l))).copied(),
            Design::Srswor { .. } => None,
        };
        let excl_union = match override_value {
            Some(v) => S::from_f64(v),
            None => {
                let union: Vec<UnitIx> = beta_k.iter().chain(beta_l).copied().sorted().dedup().collect();
                self.exclusion_prob::<S>(&union)?
            }
        };
        Ok(S::one() - (excl_k + excl_l - excl_union))
    }

    /// Probability mass the PIDA weights scale by: π_i under SRSWOR, the
    /// single-draw probability p_i under independent draws.
    pub fn selection_weight<S: Scalar>(&self, i: UnitIx) -> Result<S> {
        match self {
            Design::Srswor { .. } => self.unit_inclusion_prob(i),
            Design::IidDraws(d) => {
                self.check_unit(i)?;
                Ok(S::from_f64(d.p[i.0]))
            }
        }
    }

    pub fn draw_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Realization> {
        match self {
            Design::Srswor { frame, size } => {
                let mut s: Vec<UnitIx> = rand::seq::index::sample(rng, *frame, *size)
                    .into_iter()
                    .map(UnitIx)
                    .collect();
                s.sort_unstable();
                Ok(Realization::Subset(s))
            }
            Design::IidDraws(d) => {
                d.require_single_unit()?;
                let dist = WeightedIndex::new(&d.p).map_err(|e| BigsError::InvalidDesign(e.to_string()))?;
                Ok(Realization::Draws(
                    (0..d.draws).map(|_| vec![UnitIx(dist.sample(rng))]).collect(),
                ))
            }
        }
    }

    /// Number of outcomes `enumerate_sample_space` would produce (saturating).
    pub fn sample_space_size(&self) -> u128 {
        match self {
            Design::Srswor { frame, size } => binomial_u128(*frame as u128, *size as u128),
            Design::IidDraws(d) => {
                let m = d.p.len() as u128;
                (0..d.draws)
                    .try_fold(1u128, |acc, _| acc.checked_mul(m))
                    .unwrap_or(u128::MAX)
            }
        }
    }

    /// Every outcome with positive probability, together with that probability.
    pub fn enumerate_sample_space<S: Scalar>(&self, cap: u128) -> Result<Vec<(Realization, S)>> {
        let size = self.sample_space_size();
        if size > cap {
            return Err(BigsError::EnumerationCap { size, cap });
        }
        match self {
            Design::Srswor { frame, size: m } => {
                let prob = S::ratio(1, size as i64);
                Ok((0..*frame)
                    .combinations(*m)
                    .map(|c| (Realization::Subset(c.into_iter().map(UnitIx).collect()), prob.clone()))
                    .collect())
            }
            Design::IidDraws(d) => {
                d.require_single_unit()?;
                let frame = d.p.len();
                Ok((0..d.draws)
                    .map(|_| (0..frame).filter(|&i| d.p[i] > 0.0))
                    .multi_cartesian_product()
                    .map(|outcome| {
                        let prob = outcome.iter().fold(S::one(), |acc, &i| acc * S::from_f64(d.p[i]));
                        let draws = outcome.into_iter().map(|i| vec![UnitIx(i)]).collect();
                        (Realization::Draws(draws), prob)
                    })
                    .collect())
            }
        }
    }

    pub fn to_json(&self, graph: &BipartiteIncidenceGraph) -> DesignJson {
        match self {
            Design::Srswor { size, .. } => DesignJson::Srswor { m: *size },
            Design::IidDraws(d) => DesignJson::IidDraws {
                n: d.draws,
                p: graph.units().map(|i| (graph.unit_id(i).to_owned(), d.p[i.0])).collect(),
                joint_exclusion_override: d
                    .overrides
                    .iter()
                    .map(|(&(a, b), &v)| (graph.motif_id(a).to_owned(), graph.motif_id(b).to_owned(), v))
                    .collect(),
            },
        }
    }

    pub fn from_json(json: &DesignJson, graph: &BipartiteIncidenceGraph) -> Result<Self> {
        match json {
            DesignJson::Srswor { m } => Design::srswor(graph.frame_size(), *m),
            DesignJson::IidDraws {
                n,
                p,
                joint_exclusion_override,
            } => {
                let mut probs = vec![None; graph.frame_size()];
                for (id, &v) in p {
                    probs[graph.unit(id)?.0] = Some(v);
                }
                let probs = probs
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            BigsError::InvalidDesign(format!(
                                "no selection probability for unit `{}`",
                                graph.unit_id(UnitIx(i))
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let overrides = joint_exclusion_override
                    .iter()
                    .map(|(a, b, v)| Ok(((graph.motif(a)?, graph.motif(b)?), *v)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Design::iid_draws(*n, probs, overrides)
            }
        }
    }
}

/// C(n, k) with saturation at `u128::MAX`.
pub fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        // acc * (n - t) is divisible by (t + 1)
        acc = match acc.checked_mul(n - t) {
            Some(v) => v / (t + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DesignJson {
    Srswor {
        m: usize,
    },
    IidDraws {
        n: usize,
        p: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        joint_exclusion_override: Vec<(String, String, f64)>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Exact;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn units(ix: &[usize]) -> Vec<UnitIx> {
        ix.iter().map(|&i| UnitIx(i)).collect()
    }

    /// Pr(event) by brute-force enumeration of all m-subsets, counted directly.
    fn subset_frequency(big_m: usize, m: usize, event: impl Fn(&[usize]) -> bool) -> Exact {
        let all: Vec<Vec<usize>> = (0..big_m).combinations(m).collect();
        let hits = all.iter().filter(|s| event(s)).count();
        Exact::ratio(hits as i64, all.len() as i64)
    }

    #[test]
    fn srswor_unit_probabilities() {
        let d = Design::srswor(5, 2).unwrap();
        assert_eq!(d.unit_inclusion_prob::<f64>(UnitIx(3)).unwrap(), 0.4);
        let d = Design::srswor(4, 2).unwrap();
        let oracle = subset_frequency(4, 2, |s| s.contains(&0) && s.contains(&1));
        assert_eq!(oracle, Exact::ratio(1, 6));
        assert_eq!(
            d.joint_unit_inclusion_prob::<Exact>(UnitIx(0), UnitIx(1)).unwrap(),
            oracle
        );
        assert_eq!(
            d.joint_unit_inclusion_prob::<Exact>(UnitIx(2), UnitIx(2)).unwrap(),
            Exact::ratio(1, 2)
        );
        assert!(d.unit_inclusion_prob::<f64>(UnitIx(4)).is_err());
    }

    #[test]
    fn srswor_exclusion_and_motif_probabilities() {
        let d = Design::srswor(4, 2).unwrap();
        let oracle = subset_frequency(4, 2, |s| !s.contains(&0) && !s.contains(&1));
        assert_eq!(d.exclusion_prob::<Exact>(&units(&[0, 1])).unwrap(), oracle);
        assert_eq!(
            d.motif_inclusion_prob::<Exact>(&units(&[0, 1])).unwrap(),
            Exact::ratio(5, 6)
        );
        assert_eq!(d.exclusion_prob::<Exact>(&units(&[0, 1, 2, 3])).unwrap(), Exact::zero());
        assert_eq!(
            d.motif_inclusion_prob::<Exact>(&units(&[0, 1, 2, 3])).unwrap(),
            Exact::one()
        );

        // Example 1 pair (κ1, κ3): β = {i1,i2}, {i3}
        let oracle = subset_frequency(4, 2, |s| (s.contains(&0) || s.contains(&1)) && s.contains(&2));
        let joint = d
            .joint_motif_inclusion_prob::<Exact>((MotifIx(0), &units(&[0, 1])), (MotifIx(2), &units(&[2])))
            .unwrap();
        assert_eq!(joint, oracle);
        assert_eq!(joint, Exact::ratio(1, 3));
    }

    fn lis_design() -> Design {
        let p = vec![0.4375, 0.1875, 0.5, 0.2, 0.5, 0.5875, 0.5875];
        Design::iid_draws(4, p, BTreeMap::new()).unwrap()
    }

    #[test]
    fn iid_probabilities_match_line_intercept_values() {
        let d = lis_design();
        let pi1: f64 = d.unit_inclusion_prob(UnitIx(0)).unwrap();
        assert!((pi1 - 0.899887).abs() < 1e-6);
        let excl: f64 = d.exclusion_prob(&units(&[3])).unwrap();
        assert!((excl - 0.4096).abs() < 1e-12);
        let pi2: f64 = d.motif_inclusion_prob(&units(&[0, 1])).unwrap();
        assert!((pi2 - 0.980).abs() < 5e-4);
        let pi13: f64 = d
            .joint_motif_inclusion_prob((MotifIx(0), &units(&[0])), (MotifIx(2), &units(&[3])))
            .unwrap();
        assert!((pi13 - 0.5076).abs() < 1e-4);
        let pi12: f64 = d
            .joint_motif_inclusion_prob((MotifIx(0), &units(&[0])), (MotifIx(1), &units(&[0, 1])))
            .unwrap();
        assert!((pi12 - pi1).abs() < 1e-15);
    }

    #[test]
    fn iid_single_draw_cases() {
        let d = Design::iid_draws(1, vec![0.3, 0.7], BTreeMap::new()).unwrap();
        assert_eq!(d.unit_inclusion_prob::<Exact>(UnitIx(1)).unwrap(), Exact::ratio(7, 10));
        assert_eq!(
            d.joint_unit_inclusion_prob::<Exact>(UnitIx(0), UnitIx(1)).unwrap(),
            Exact::zero()
        );
    }

    #[test]
    fn excess_mass_needs_override() {
        let d = lis_design();
        // β1 ∪ β4 = {s1, s6}: 0.4375 + 0.5875 > 1
        let err = d.joint_motif_inclusion_prob::<f64>((MotifIx(0), &units(&[0])), (MotifIx(3), &units(&[5])));
        assert!(matches!(err, Err(BigsError::ExcessSelectionMass { .. })));

        let mut overrides = BTreeMap::new();
        overrides.insert((MotifIx(3), MotifIx(0)), 0.01);
        let d = Design::iid_draws(4, vec![0.4375, 0.1875, 0.5, 0.2, 0.5, 0.5875, 0.5875], overrides).unwrap();
        let v: f64 = d
            .joint_motif_inclusion_prob((MotifIx(0), &units(&[0])), (MotifIx(3), &units(&[5])))
            .unwrap();
        let expected = 1.0 - (0.5625f64.powi(4) + 0.4125f64.powi(4) - 0.01);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn enumeration_sizes_and_masses() {
        let d = Design::srswor(4, 2).unwrap();
        let space = d.enumerate_sample_space::<Exact>(DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(space.len(), 6);
        assert!(space.iter().all(|(_, p)| *p == Exact::ratio(1, 6)));
        assert_eq!(
            Design::srswor(5, 2)
                .unwrap()
                .enumerate_sample_space::<f64>(100)
                .unwrap()
                .len(),
            10
        );

        let d = Design::iid_draws(2, vec![0.3, 0.7], BTreeMap::new()).unwrap();
        let space = d.enumerate_sample_space::<Exact>(DEFAULT_ENUMERATION_CAP).unwrap();
        let probs: Vec<Exact> = space.iter().map(|(_, p)| p.clone()).collect();
        let expected = [(9, 100), (21, 100), (21, 100), (49, 100)].map(|(n, d)| Exact::ratio(n, d));
        assert_eq!(probs, expected);

        assert!(matches!(
            Design::srswor(30, 15)
                .unwrap()
                .enumerate_sample_space::<f64>(DEFAULT_ENUMERATION_CAP),
            Err(BigsError::EnumerationCap { .. })
        ));
        assert!(lis_design().enumerate_sample_space::<f64>(u128::MAX).is_err());
    }

    #[test]
    fn draws_are_deterministic_per_seed() {
        let d = Design::srswor(4, 2).unwrap();
        let a = d.draw_sample(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = d.draw_sample(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.distinct_units().len(), 2);

        let d = Design::iid_draws(4, vec![0.25; 4], BTreeMap::new()).unwrap();
        match d.draw_sample(&mut ChaCha8Rng::seed_from_u64(9)).unwrap() {
            Realization::Draws(draws) => assert!(draws.len() == 4 && draws.iter().all(|x| x.len() == 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empirical_inclusion_frequency() {
        let d = Design::srswor(7, 3).unwrap();
        let reps = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 7];
        for _ in 0..reps {
            for i in d.draw_sample(&mut rng).unwrap().distinct_units() {
                counts[i.0] += 1;
            }
        }
        let pi = 3.0 / 7.0;
        let bound = 4.0 * (pi * (1.0 - pi) / reps as f64).sqrt();
        for c in counts {
            assert!((c as f64 / reps as f64 - pi).abs() < bound);
        }
    }

    fn arb_design() -> impl Strategy<Value = Design> {
        prop_oneof![
            (1usize..7)
                .prop_flat_map(|big_m| (Just(big_m), 1..=big_m))
                .prop_map(|(big_m, m)| Design::srswor(big_m, m).unwrap()),
            (
                1usize..4,
                prop::sample::select(vec![
                    vec![1.0],
                    vec![0.5, 0.5],
                    vec![0.3, 0.7],
                    vec![0.1, 0.2, 0.7],
                    vec![0.125, 0.375, 0.5],
                    vec![0.25, 0.25, 0.25, 0.25],
                ])
            )
                .prop_map(|(n, p)| Design::iid_draws(n, p, BTreeMap::new()).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn closed_forms_match_enumeration(d in arb_design(), picks in proptest::collection::btree_set(0usize..7, 1..4)) {
            prop_assume!(d.frame_size() > 0 && d.enumerate_sample_space::<Exact>(10_000).is_ok());
            let space = d.enumerate_sample_space::<Exact>(10_000).unwrap();
            prop_assert_eq!(crate::number::sum(space.iter().map(|(_, p)| p.clone())), Exact::one());

            let frame = d.frame_size();
            for i in (0..frame).map(UnitIx) {
                let freq = crate::number::sum(space.iter().filter(|(r, _)| r.distinct_units().contains(&i)).map(|(_, p)| p.clone()));
                prop_assert_eq!(d.unit_inclusion_prob::<Exact>(i).unwrap(), freq);
            }
            let set: Vec<UnitIx> = picks.into_iter().filter(|&i| i < frame).map(UnitIx).collect();
            prop_assume!(!set.is_empty());
            let miss = crate::number::sum(space.iter()
                .filter(|(r, _)| r.distinct_units().iter().all(|u| !set.contains(u)))
                .map(|(_, p)| p.clone()));
            prop_assert_eq!(d.exclusion_prob::<Exact>(&set).unwrap(), miss);

            // monotone in the ancestor set
            let smaller = &set[..1];
            prop_assert!(d.motif_inclusion_prob::<f64>(smaller).unwrap() <= d.motif_inclusion_prob::<f64>(&set).unwrap() + 1e-15);
        }
    }
}
