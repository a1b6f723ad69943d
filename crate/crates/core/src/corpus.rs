//! The two worked example pairs, with exact rational coefficients.

use crate::interval_map::Family;
use crate::mapspec::{BranchSpec, BranchSpecKind, MapSpec, Scalar};

fn r(p: i64, q: i64) -> Scalar {
    Scalar::Ratio(p, q)
}

fn affine(c0: Scalar, c1: Scalar) -> BranchSpec {
    BranchSpec {
        kind: BranchSpecKind::Affine,
        coeffs: vec![c0, c1],
    }
}

fn unit_map(t: Scalar, v: Scalar, family: Family, left: BranchSpec, right: BranchSpec) -> MapSpec {
    MapSpec {
        domain: [r(0, 1), r(1, 1)],
        t,
        family,
        value_at_t: v,
        left,
        right,
    }
}

/// Increasing pair: `f = x/2` left of `1/4`, `(1 + x)/2` right of it, `f(1/4) = 3/16`;
/// `g = x/4` left of `1/2`, `(3 + x)/4` right of it, `g(1/2) = 5/16`.
pub fn example_one() -> (MapSpec, MapSpec) {
    let f = unit_map(
        r(1, 4),
        r(3, 16),
        Family::IncreasingA,
        affine(r(0, 1), r(1, 2)),
        affine(r(1, 2), r(1, 2)),
    );
    let g = unit_map(
        r(1, 2),
        r(5, 16),
        Family::IncreasingA,
        affine(r(0, 1), r(1, 4)),
        affine(r(3, 4), r(1, 4)),
    );
    (f, g)
}

/// Decreasing pair: `f = 1 − 23x/40` left of `1/2`, `23(1 − x)/40` right of it,
/// `f(1/2) = 17/40`; `g = 1 − x/8` left of `1/4`, `(1 − x)/8` right of it,
/// `g(1/4) = 53/272`.
pub fn example_two() -> (MapSpec, MapSpec) {
    let f = unit_map(
        r(1, 2),
        r(17, 40),
        Family::DecreasingB,
        affine(r(1, 1), r(-23, 40)),
        affine(r(23, 40), r(-23, 40)),
    );
    let g = unit_map(
        r(1, 4),
        r(53, 272),
        Family::DecreasingB,
        affine(r(1, 1), r(-1, 8)),
        affine(r(1, 8), r(-1, 8)),
    );
    (f, g)
}
