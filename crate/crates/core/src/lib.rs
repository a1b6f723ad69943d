//! Topological conjugacies between strictly monotone interval maps with one
//! jump discontinuity.
//!
//! The pipeline is: describe two maps ([`JumpMap`]), check family membership
//! ([`JumpMap::validate`]), decide whether they are conjugate and with which
//! orientation ([`decide_pair`]), build a conjugacy from an initial
//! homeomorphism on the fundamental domain ([`build_conjugacy`]) and check it
//! numerically ([`verify_conjugacy`], [`check_smoothness`]).

pub mod builder;
pub mod corpus;
pub mod error;
pub mod interp;
pub mod interval_map;
pub mod mapspec;
pub mod orbit;
pub mod plot;
mod poly;
pub mod verify;

pub use builder::{
    build_conjugacy, build_conjugacy_a, build_conjugacy_b, default_initial_homeo,
    fundamental_domains, initial_homeo_from_spec, pinned_points, Conjugacy, EvalParams,
    InitSpec, InitialHomeo, PieceSpec, PinnedPoints,
};
pub use error::{Error, Result};
pub use interp::{InterpolantKind, MonotoneInterpolant};
pub use interval_map::{
    decide_pair, Branch, BranchKind, CasePair, Family, Interval, JumpKind, JumpMap, LimitsOrder,
    Orientation, PairDecision, Side, ValidationParams, ValidationReport, Violation,
};
pub use mapspec::{ConjugacyHandle, MapSpec};
pub use orbit::{boundary_orbit, Cell, End, OrbitPartition, OrbitPoints};
pub use verify::{
    check_smoothness, finite_difference_derivative, verify_conjugacy, verify_homeomorphism,
    Homeomorphism, InverseConjugacy, SmoothnessParams, SmoothnessReport, VerificationReport,
    VerifyParams,
};
