use thiserror::Error;

use crate::instance::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing header `{0}`")]
    MissingHeader(&'static str),

    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("dimension mismatch: {section} declares {declared} entries but lists {found}")]
    DimensionMismatch {
        section: &'static str,
        declared: usize,
        found: usize,
    },

    #[error("item {item} is assigned to city 1 (the depot holds no items)")]
    ItemAtDepot { item: usize },

    #[error("unsupported EDGE_WEIGHT_TYPE `{0}` (only CEIL_2D is accepted)")]
    UnsupportedEdgeWeightType(String),

    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("city {city} out of range 1..={n}")]
    CityOutOfRange { city: usize, n: usize },

    #[error("tour position {position} out of range 2..={n}")]
    PositionOutOfRange { position: usize, n: usize },

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("brute-force enumeration refuses {0} items (limit {limit})", limit = crate::pwt::BRUTE_FORCE_MAX_ITEMS)]
    TooManyItems(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
