use thiserror::Error;

#[derive(Debug, Error)]
pub enum BigsError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("duplicate edge (`{unit}`, `{motif}`)")]
    DuplicateEdge { unit: String, motif: String },

    #[error("unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("unestimable motif `{0}`: it has no ancestor in the frame")]
    UnestimableMotif(String),

    #[error("motif `{0}` has a non-finite value")]
    NonFiniteValue(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("selection mass {mass} over the unit set exceeds 1; a joint exclusion override is required")]
    ExcessSelectionMass { mass: f64 },

    #[error("sample space has {size} outcomes, above the enumeration cap of {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("{0} requires simple random sampling without replacement")]
    RequiresSrswor(&'static str),

    #[error("no weight for sample edge ({unit}, {motif})")]
    MissingWeight { unit: usize, motif: usize },

    #[error("ancestor degree of unit {0} was not observed")]
    UnknownDegree(usize),

    #[error("weights of motif {motif} sum to {sum}, not 1")]
    WeightSum { motif: usize, sum: f64 },

    #[error("weight is not exactly representable: {0}")]
    Inexact(String),

    #[error("priority probability is zero for edge ({unit}, {motif})")]
    ZeroPriority { unit: usize, motif: usize },

    #[error("zero inclusion probability: {0}")]
    ZeroProbability(String),

    #[error("conditioning motif set is unreachable under the design")]
    UnreachableEvent,

    #[error("between-draw variance needs at least two draws")]
    TooFewDraws,

    #[error("invalid frame ordering: {0}")]
    InvalidOrdering(String),

    #[error("infeasible graph parameters: {0}")]
    Infeasible(String),

    #[error("cannot parse estimator `{0}`")]
    UnknownEstimator(String),

    #[error("{estimator} is not applicable: {reason}")]
    NotApplicable { estimator: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BigsError> = std::result::Result<T, E>;
