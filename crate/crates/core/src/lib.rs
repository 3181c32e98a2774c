//! Design-based estimation under bipartite incidence graph sampling.
//!
//! A population is a bipartite graph from sampling units to motifs. An
//! initial sample of units reveals their motifs together with each
//! motif's full ancestor set, and incidence weighting estimators turn the
//! sample edges into unbiased estimates of the motif total.

pub mod design;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod graph;
pub mod number;
pub mod scenarios;

pub use design::{Design, Realization};
pub use error::{BigsError, Result};
pub use estimators::{EstimateReport, Estimator, EstimatorSpec, FrameOrder, WeightScheme};
pub use graph::{BipartiteIncidenceGraph, MotifIx, SampleBig, UnitIx};
pub use number::{Exact, Scalar};
pub use scenarios::Scenario;
