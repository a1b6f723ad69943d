//! Strictly monotone interval maps with a single jump discontinuity.
//!
//! A [`JumpMap`] lives on `[a, b]`, jumps at `t ∈ (a, b)`, and is made of a
//! left branch on `[a, t)` and a right branch on `(t, b]`, plus the value it
//! takes at `t`. Branches are always evaluable on the closure of their domain,
//! so `left.eval(t)` is the one-sided limit `f(t−0)`.
//!
//! Two families are supported:
//! * [`Family::IncreasingA`]: increasing branches, `a` and `b` attracting fixed
//!   points, `f(x) < x` left of the jump and `f(x) > x` right of it.
//! * [`Family::DecreasingB`]: decreasing branches, `{a, b}` an attracting
//!   period-2 orbit and no other periodic points.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

/// Relative tolerance for deciding whether `f(t)` equals a one-sided limit.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("interval"));
        }
        if lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "A")]
    IncreasingA,
    #[serde(rename = "B")]
    DecreasingB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchKind {
    Affine,
    Polynomial,
    Callable,
}

pub type BranchFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Poly(Vec<f64>),
    Callable(BranchFn),
}

/// One continuous, strictly monotone piece of a jump map.
#[derive(Clone)]
pub struct Branch {
    kind: BranchKind,
    shape: Shape,
    domain: Interval,
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Branch");
        s.field("kind", &self.kind);
        if let Shape::Poly(c) = &self.shape {
            s.field("coeffs", c);
        }
        s.field("domain", &self.domain).finish()
    }
}

impl Branch {
    /// `x ↦ intercept + slope·x`.
    pub fn affine(intercept: f64, slope: f64, domain: Interval) -> Result<Self> {
        if !intercept.is_finite() || !slope.is_finite() {
            return Err(Error::NonFinite("branch coefficients"));
        }
        Ok(Branch {
            kind: BranchKind::Affine,
            shape: Shape::Poly(vec![intercept, slope]),
            domain,
        })
    }

    /// Polynomial with ascending-degree coefficients.
    pub fn polynomial(coeffs: Vec<f64>, domain: Interval) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Structure("polynomial branch needs coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("branch coefficients"));
        }
        Ok(Branch {
            kind: BranchKind::Polynomial,
            shape: Shape::Poly(coeffs),
            domain,
        })
    }

    /// Black-box branch. Usable for evaluation and conjugacy construction, but
    /// it has no analytic derivative, so smoothness checks reject it.
    pub fn callable(func: BranchFn, domain: Interval) -> Self {
        Branch {
            kind: BranchKind::Callable,
            shape: Shape::Callable(func),
            domain,
        }
    }

    pub fn kind(&self) -> BranchKind {
        self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.shape {
            Shape::Poly(c) => Some(c),
            Shape::Callable(_) => None,
        }
    }

    /// Evaluates the branch formula; no domain check, so the closure points
    /// (the jump location) are evaluable.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Poly(c) => poly::eval(c, x),
            Shape::Callable(func) => func(x),
        }
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        match &self.shape {
            Shape::Poly(c) if self.kind == BranchKind::Affine => Ok(c[1]),
            Shape::Poly(c) => Ok(poly::eval(&poly::derivative(c), x)),
            Shape::Callable(_) => Err(Error::NonDifferentiableBranch),
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.eval(self.domain.hi) > self.eval(self.domain.lo)
    }

    /// Image of the closed domain.
    pub fn image(&self) -> (f64, f64) {
        let (u, v) = (self.eval(self.domain.lo), self.eval(self.domain.hi));
        (u.min(v), u.max(v))
    }

    /// Solves `branch(x) = y` on the closed domain.
    ///
    /// Affine branches use the closed form; everything else bisects until
    /// `|branch(x) − y| ≤ tol·max(1, |y|)` or the bracket collapses.
    pub fn inverse(&self, y: f64, tol: f64) -> Result<f64> {
        let (lo, hi) = self.image();
        let slack = tol * y.abs().max(1.0);
        if !y.is_finite() || y < lo - slack || y > hi + slack {
            return Err(Error::Range { y, lo, hi });
        }
        Ok(self.inverse_unchecked(y, tol))
    }

    /// Inverse without the range check: affine branches extrapolate, other
    /// kinds clamp `y` into the image first.
    pub(crate) fn inverse_unchecked(&self, y: f64, tol: f64) -> f64 {
        match &self.shape {
            Shape::Poly(c) if self.kind == BranchKind::Affine => (y - c[0]) / c[1],
            _ => self.bisect_inverse(y, tol),
        }
    }

    fn bisect_inverse(&self, y: f64, tol: f64) -> f64 {
        let increasing = self.is_increasing();
        let (img_lo, img_hi) = self.image();
        let y = y.clamp(img_lo, img_hi);
        let target_tol = tol * y.abs().max(1.0);
        let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval(mid);
            if (v - y).abs() <= target_tol {
                return mid;
            }
            if (v < y) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (self.eval(lo) - y).abs() <= (self.eval(hi) - y).abs() {
            lo
        } else {
            hi
        }
    }
}

/// How `f(t)` sits relative to the one-sided limits at the jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpKind {
    Interior,
    AttainsLeft,
    AttainsRight,
}

impl JumpKind {
    pub fn is_interior(self) -> bool {
        self == JumpKind::Interior
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CasePair {
    C1,
    C2,
    D1,
    D2,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDecision {
    pub conjugate: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orientation: Option<Orientation>,
    pub case_pair: CasePair,
}

/// Which one-sided limit is smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitsOrder {
    /// `f(t−0) < f(t+0)`
    Ascending,
    /// `f(t+0) < f(t−0)`
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// Two points of one branch whose images are in the wrong order.
    MonotonicityViolation {
        side: Side,
        x1: f64,
        x2: f64,
        y1: f64,
        y2: f64,
    },
    /// Derivative vanishes without an observable order inversion.
    CriticalPoint { side: Side, x: f64 },
    EndpointViolation {
        endpoint: String,
        expected: f64,
        observed: f64,
    },
    NoJump { left_limit: f64, right_limit: f64 },
    /// The one-sided limits do not straddle `t` the way the family requires.
    JumpStraddle {
        t: f64,
        left_limit: f64,
        right_limit: f64,
    },
    ValueOutsideBracket {
        value: f64,
        left_limit: f64,
        right_limit: f64,
    },
    FixedPointAtJump { t: f64 },
    /// A sample where `f(x) − x` (family A) or `f²(x) − x` (family B) has the
    /// wrong sign, i.e. an extra fixed or period-2 point.
    AttractivityViolation { x: f64, image: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationParams {
    pub eq_tol: f64,
    pub samples_per_side: usize,
}

impl Default for ValidationParams {
    fn default() -> Self {
        ValidationParams {
            eq_tol: EQ_TOL,
            samples_per_side: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family: Family,
    pub violations: Vec<Violation>,
    pub limits_order: Option<LimitsOrder>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A strictly monotone map of `[a, b]` with one jump at `t`.
#[derive(Debug, Clone)]
pub struct JumpMap {
    domain: Interval,
    t: f64,
    left: Branch,
    right: Branch,
    value_at_t: f64,
    family: Family,
}

impl JumpMap {
    /// Assembles a map after structural checks only; see [`JumpMap::validate`]
    /// for family membership.
    pub fn new(
        domain: Interval,
        t: f64,
        left: Branch,
        right: Branch,
        value_at_t: f64,
        family: Family,
    ) -> Result<Self> {
        if !t.is_finite() || !value_at_t.is_finite() {
            return Err(Error::NonFinite("jump data"));
        }
        if !(domain.lo < t && t < domain.hi) {
            return Err(Error::Structure(format!(
                "jump t = {t} must lie inside ({}, {})",
                domain.lo, domain.hi
            )));
        }
        if left.domain != (Interval { lo: domain.lo, hi: t })
            || right.domain != (Interval { lo: t, hi: domain.hi })
        {
            return Err(Error::Structure(
                "branch domains must be [a, t] and [t, b]".into(),
            ));
        }
        Ok(JumpMap {
            domain,
            t,
            left,
            right,
            value_at_t,
            family,
        })
    }

    /// Map with two affine branches, given as `(intercept, slope)` pairs.
    pub fn affine(
        a: f64,
        b: f64,
        t: f64,
        left: (f64, f64),
        right: (f64, f64),
        value_at_t: f64,
        family: Family,
    ) -> Result<Self> {
        let domain = Interval::new(a, b)?;
        if !(a < t && t < b) {
            return Err(Error::Structure(format!("jump t = {t} outside ({a}, {b})")));
        }
        let l = Branch::affine(left.0, left.1, Interval { lo: a, hi: t })?;
        let r = Branch::affine(right.0, right.1, Interval { lo: t, hi: b })?;
        JumpMap::new(domain, t, l, r, value_at_t, family)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn value_at_t(&self) -> f64 {
        self.value_at_t
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn left(&self) -> &Branch {
        &self.left
    }

    pub fn right(&self) -> &Branch {
        &self.right
    }

    pub fn branch(&self, side: Side) -> &Branch {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Same map with a different value at the jump.
    pub fn with_value_at_t(&self, value_at_t: f64) -> Self {
        JumpMap {
            value_at_t,
            ..self.clone()
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::Domain {
                x,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        if x < self.t {
            self.left.eval(x)
        } else if x > self.t {
            self.right.eval(x)
        } else {
            self.value_at_t
        }
    }

    /// `(f(t−0), f(t+0))`.
    pub fn one_sided_limits(&self) -> (f64, f64) {
        (self.left.eval(self.t), self.right.eval(self.t))
    }

    fn eq_scale(&self) -> f64 {
        let (l, r) = self.one_sided_limits();
        l.abs().max(r.abs()).max(self.domain.width())
    }

    pub fn classify(&self) -> JumpKind {
        self.classify_with(EQ_TOL)
    }

    pub fn classify_with(&self, eq_tol: f64) -> JumpKind {
        let (l, r) = self.one_sided_limits();
        let tol = eq_tol * self.eq_scale();
        let v = self.value_at_t;
        if (v - l).abs() <= tol {
            JumpKind::AttainsLeft
        } else if (v - r).abs() <= tol {
            JumpKind::AttainsRight
        } else {
            JumpKind::Interior
        }
    }

    /// Every violated family invariant; an empty report admits the map.
    pub fn validate(&self, params: &ValidationParams) -> ValidationReport {
        let mut violations = Vec::new();
        let (a, b, t) = (self.domain.lo, self.domain.hi, self.t);
        let tol = params.eq_tol * self.eq_scale();
        let increasing = self.family == Family::IncreasingA;

        for side in [Side::Left, Side::Right] {
            if let Some(v) = check_branch_monotone(self.branch(side), side, increasing, params) {
                violations.push(v);
            }
        }

        let (fa, fb) = (self.left.eval(a), self.right.eval(b));
        let (want_fa, want_fb) = if increasing { (a, b) } else { (b, a) };
        if (fa - want_fa).abs() > tol {
            violations.push(Violation::EndpointViolation {
                endpoint: "a".into(),
                expected: want_fa,
                observed: fa,
            });
        }
        if (fb - want_fb).abs() > tol {
            violations.push(Violation::EndpointViolation {
                endpoint: "b".into(),
                expected: want_fb,
                observed: fb,
            });
        }

        let (l, r) = self.one_sided_limits();
        if (l - r).abs() <= tol {
            violations.push(Violation::NoJump {
                left_limit: l,
                right_limit: r,
            });
        }
        let straddles = if increasing {
            l < t && t < r
        } else {
            r < t && t < l
        };
        if !straddles {
            violations.push(Violation::JumpStraddle {
                t,
                left_limit: l,
                right_limit: r,
            });
        }

        let v = self.value_at_t;
        let (lo, hi) = if increasing { (l, r) } else { (l.min(r), l.max(r)) };
        if v < lo - tol || v > hi + tol {
            violations.push(Violation::ValueOutsideBracket {
                value: v,
                left_limit: l,
                right_limit: r,
            });
        }
        if (v - t).abs() <= tol {
            violations.push(Violation::FixedPointAtJump { t });
        }

        if straddles {
            if let Some(v) = self.check_attractivity(params) {
                violations.push(v);
            }
        }

        let limits_order = if (l - r).abs() <= tol {
            None
        } else if l < r {
            Some(LimitsOrder::Ascending)
        } else {
            Some(LimitsOrder::Descending)
        };

        ValidationReport {
            family: self.family,
            violations,
            limits_order,
        }
    }

    /// Samples the sign of `f(x) − x` (family A) or `f²(x) − x` (family B)
    /// on each side of the jump.
    fn check_attractivity(&self, params: &ValidationParams) -> Option<Violation> {
        let (a, b, t) = (self.domain.lo, self.domain.hi, self.t);
        let n = params.samples_per_side.max(1);
        match self.family {
            Family::IncreasingA => {
                for i in 1..=n {
                    let x = a + (t - a) * i as f64 / (n + 1) as f64;
                    let fx = self.left.eval(x);
                    if fx >= x {
                        return Some(Violation::AttractivityViolation { x, image: fx });
                    }
                    let x = t + (b - t) * i as f64 / (n + 1) as f64;
                    let fx = self.right.eval(x);
                    if fx <= x {
                        return Some(Violation::AttractivityViolation { x, image: fx });
                    }
                }
            }
            Family::DecreasingB => {
                // Left points (including the closure at t) go right, then back.
                for i in 1..=n {
                    let x = a + (t - a) * i as f64 / n as f64;
                    let f2 = self.right.eval(self.left.eval(x));
                    if f2 >= x {
                        return Some(Violation::AttractivityViolation { x, image: f2 });
                    }
                    let x = t + (b - t) * (i - 1) as f64 / n as f64;
                    let f2 = self.left.eval(self.right.eval(x));
                    if f2 <= x {
                        return Some(Violation::AttractivityViolation { x, image: f2 });
                    }
                }
            }
        }
        None
    }
}

fn check_branch_monotone(
    branch: &Branch,
    side: Side,
    increasing: bool,
    params: &ValidationParams,
) -> Option<Violation> {
    let Interval { lo, hi } = branch.domain();
    let sign = if increasing { 1.0 } else { -1.0 };
    let wrong_order = |y1: f64, y2: f64| sign * (y2 - y1) <= 0.0;

    if let Some(coeffs) = branch.coefficients() {
        let d = poly::derivative(coeffs);
        if branch.kind() == BranchKind::Affine || d.len() <= 1 {
            let slope = d.first().copied().unwrap_or(0.0);
            if sign * slope <= 0.0 {
                let (y1, y2) = (branch.eval(lo), branch.eval(hi));
                return Some(Violation::MonotonicityViolation {
                    side,
                    x1: lo,
                    x2: hi,
                    y1,
                    y2,
                });
            }
            return None;
        }
        // Derivative roots on the closed domain: a sign change is a local
        // extremum (witness pair), otherwise a flat inflection.
        let roots = poly::real_roots(&d, lo, hi);
        for &r in &roots {
            let delta = 1e-6 * (hi - lo);
            let before = (r - delta).max(lo);
            let after = (r + delta).min(hi);
            for (x1, x2) in [(before, r), (r, after)] {
                if x1 < x2 {
                    let (y1, y2) = (branch.eval(x1), branch.eval(x2));
                    // a tie here is rounding at a flat point, not a reversal
                    if sign * (y2 - y1) < 0.0 {
                        return Some(Violation::MonotonicityViolation {
                            side,
                            x1,
                            x2,
                            y1,
                            y2,
                        });
                    }
                }
            }
        }
        if let Some(&r) = roots.first() {
            return Some(Violation::CriticalPoint { side, x: r });
        }
        let n = params.samples_per_side.max(2);
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            if sign * poly::eval(&d, x) <= 0.0 {
                return Some(Violation::CriticalPoint { side, x });
            }
        }
    }

    let n = params.samples_per_side.max(2);
    let mut prev = (lo, branch.eval(lo));
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let y = branch.eval(x);
        if wrong_order(prev.1, y) {
            return Some(Violation::MonotonicityViolation {
                side,
                x1: prev.0,
                x2: x,
                y1: prev.1,
                y2: y,
            });
        }
        prev = (x, y);
    }
    None
}

/// Decides whether two valid maps of the same family are conjugate and, if so,
/// the orientation every conjugacy must have.
pub fn decide_pair(f: &JumpMap, g: &JumpMap) -> Result<PairDecision> {
    if f.family() != g.family() {
        return Err(Error::NotComparable(f.family(), g.family()));
    }
    let (interior_case, attains_case) = match f.family() {
        Family::IncreasingA => (CasePair::C1, CasePair::C2),
        Family::DecreasingB => (CasePair::D1, CasePair::D2),
    };
    let decision = match (f.classify(), g.classify()) {
        (JumpKind::Interior, JumpKind::Interior) => {
            let prod = (f.value_at_t() - f.t()) * (g.value_at_t() - g.t());
            let orientation = if prod > 0.0 {
                Orientation::Increasing
            } else {
                Orientation::Decreasing
            };
            PairDecision {
                conjugate: true,
                orientation: Some(orientation),
                case_pair: interior_case,
            }
        }
        (JumpKind::Interior, _) | (_, JumpKind::Interior) => PairDecision {
            conjugate: false,
            orientation: None,
            case_pair: CasePair::Mixed,
        },
        (kf, kg) => PairDecision {
            conjugate: true,
            orientation: Some(if kf == kg {
                Orientation::Increasing
            } else {
                Orientation::Decreasing
            }),
            case_pair: attains_case,
        },
    };
    Ok(decision)
}
