use thiserror::Error;

use crate::interval_map::{Family, ValidationReport};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("malformed map: {0}")]
    Structure(String),

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("y = {y} lies outside the branch image [{lo}, {hi}]")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("map rejected: {} violation(s)", .0.violations.len())]
    Invalid(Box<ValidationReport>),

    #[error("maps of families {0:?} and {1:?} cannot be compared")]
    NotComparable(Family, Family),

    #[error("maps are not conjugate ({0})")]
    NotConjugate(String),

    #[error("iteration left the family: {0}")]
    Orbit(String),

    #[error("x = {x} lies beyond the truncated partition (depth {depth}); raise n_max")]
    DepthExceeded { x: f64, depth: usize },

    #[error("pinned points are not strictly monotone: {0}")]
    PinOrder(String),

    #[error("initial homeomorphism rejected: {0}")]
    Init(String),

    #[error("composition leaves its domain: {0}")]
    ConstructionDomain(String),

    #[error("branch has no analytic derivative")]
    NonDifferentiableBranch,

    #[error("smoothness check out of scope: {0}")]
    Scope(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("map spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
