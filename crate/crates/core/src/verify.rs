//! Numerical checks on constructed conjugacies: the conjugacy equation on a
//! grid, homeomorphism properties, forced orbit values, and the C¹ criteria
//! for family A.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::{build_conjugacy, pinned_points, Conjugacy, EvalParams, InitialHomeo};
use crate::error::{Error, Result};
use crate::interval_map::{decide_pair, CasePair, Family, Interval, JumpMap, Orientation, Side};

/// A monotone bijection between two intervals, as seen by the verifier.
pub trait Homeomorphism: Sync {
    fn domain(&self) -> Interval;
    fn codomain(&self) -> Interval;
    fn orientation(&self) -> Orientation;
    fn eval(&self, x: f64) -> Result<f64>;
    /// Preimage of `y`, accurate to `tol` in the image (`0` means as tight as
    /// bisection allows).
    fn eval_inverse(&self, y: f64, tol: f64) -> Result<f64>;
}

impl Homeomorphism for Conjugacy {
    fn domain(&self) -> Interval {
        Conjugacy::domain(self)
    }

    fn codomain(&self) -> Interval {
        Conjugacy::codomain(self)
    }

    fn orientation(&self) -> Orientation {
        Conjugacy::orientation(self)
    }

    fn eval(&self, x: f64) -> Result<f64> {
        self.evaluate(x)
    }

    fn eval_inverse(&self, y: f64, tol: f64) -> Result<f64> {
        self.evaluate_inverse(y, tol)
    }
}

/// `φ⁻¹`, evaluated by bisection. It conjugates `g` back to `f`.
#[derive(Debug, Clone, Copy)]
pub struct InverseConjugacy<'a> {
    phi: &'a Conjugacy,
}

impl<'a> InverseConjugacy<'a> {
    pub fn new(phi: &'a Conjugacy) -> Self {
        InverseConjugacy { phi }
    }
}

impl Homeomorphism for InverseConjugacy<'_> {
    fn domain(&self) -> Interval {
        self.phi.codomain()
    }

    fn codomain(&self) -> Interval {
        self.phi.domain()
    }

    fn orientation(&self) -> Orientation {
        self.phi.orientation()
    }

    fn eval(&self, y: f64) -> Result<f64> {
        self.phi.evaluate_inverse(y, 0.0)
    }

    fn eval_inverse(&self, x: f64, _tol: f64) -> Result<f64> {
        self.phi.evaluate(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    /// Points in the residual and monotonicity grid.
    pub grid_n: usize,
    /// Target points in the surjectivity check.
    pub surj_n: usize,
    /// Tolerance handed to `eval_inverse` in the surjectivity check.
    pub tol: f64,
    /// Number of iterates of the jump point compared against the forced values.
    pub orbit_depth: usize,
    /// Grid points whose image is this close to the jump are skipped.
    pub endpoint_eps: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            grid_n: 10_000,
            surj_n: 1000,
            tol: 0.0,
            orbit_depth: 20,
            endpoint_eps: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_residual: f64,
    pub residual_argmax: f64,
    pub grid_size: usize,
    pub monotonicity_ok: bool,
    pub surjectivity_max_gap: f64,
    pub orbit_pin_max_error: f64,
    pub endpoint_values_ok: bool,
    /// Grid points where evaluation failed; they count as infinite residuals.
    pub eval_failures: usize,
}

impl VerificationReport {
    pub fn passes(&self, residual_bound: f64) -> bool {
        self.max_residual <= residual_bound
            && self.monotonicity_ok
            && self.endpoint_values_ok
            && self.eval_failures == 0
    }
}

fn uniform(iv: Interval, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![iv.lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    iv.hi
                } else {
                    iv.lo + iv.width() * (i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

/// `(x, |h(f(x)) − g(h(x))|)` on a uniform grid of `grid_n` points, skipping
/// the jump of `f` and points sent within `endpoint_eps` of it. Failed
/// evaluations give `+∞`.
pub fn residual_samples<H: Homeomorphism>(
    h: &H,
    f: &JumpMap,
    g: &JumpMap,
    grid_n: usize,
    endpoint_eps: f64,
) -> Vec<(f64, f64)> {
    let t = f.t();
    let xs: Vec<f64> = uniform(f.domain(), grid_n)
        .into_iter()
        .filter(|&x| x != t && (f.eval_unchecked(x) - t).abs() > endpoint_eps)
        .collect();
    xs.par_iter()
        .map(|&x| {
            let r = h
                .eval(f.eval_unchecked(x))
                .and_then(|lhs| Ok((lhs - g.eval(h.eval(x)?)?).abs()));
            (x, r.unwrap_or(f64::INFINITY))
        })
        .collect()
}

/// Checks that `h` conjugates `f` to `g`.
pub fn verify_homeomorphism<H: Homeomorphism>(
    h: &H,
    f: &JumpMap,
    g: &JumpMap,
    params: &VerifyParams,
) -> VerificationReport {
    let residuals = residual_samples(h, f, g, params.grid_n, params.endpoint_eps);
    let mut max_residual = 0.0f64;
    let mut residual_argmax = f.t();
    let mut eval_failures = 0;
    for &(x, r) in &residuals {
        if !r.is_finite() {
            eval_failures += 1;
        }
        if r > max_residual || (r.is_nan() && !max_residual.is_nan()) {
            max_residual = r;
            residual_argmax = x;
        }
    }

    let Interval { lo: a, hi: b } = h.domain();
    let Interval { lo: c, hi: d } = h.codomain();
    let inc = h.orientation() == Orientation::Increasing;
    let (ha, hb) = if inc { (c, d) } else { (d, c) };

    let values: Vec<Option<f64>> = uniform(h.domain(), params.grid_n)
        .par_iter()
        .map(|&x| h.eval(x).ok())
        .collect();
    // Consecutive grid values must move strictly in the declared direction.
    // Equal values are tolerated only where they have saturated to an
    // endpoint image in floating point.
    let monotonicity_ok = values.windows(2).all(|w| match (w[0], w[1]) {
        (Some(u), Some(v)) => {
            let strict = if inc { v > u } else { v < u };
            strict || (u == v && (u == ha || u == hb))
        }
        _ => false,
    });

    let surjectivity_max_gap = uniform(h.codomain(), params.surj_n)
        .par_iter()
        .map(|&y| {
            h.eval_inverse(y, params.tol)
                .and_then(|x| h.eval(x))
                .map(|v| (v - y).abs())
                .unwrap_or(f64::INFINITY)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0f64, f64::max);

    let mut pin_targets: Vec<(f64, f64)> = Vec::new();
    let (mut x, mut y) = (f.t(), g.t());
    for _ in 0..=params.orbit_depth {
        pin_targets.push((x, y));
        x = f.eval_unchecked(x);
        y = g.eval_unchecked(y);
    }
    if let Ok(p) = pinned_points(f, g, h.orientation()) {
        pin_targets.extend(p.points);
    }
    let orbit_pin_max_error = pin_targets
        .iter()
        .map(|&(x, y)| h.eval(x).map(|v| (v - y).abs()).unwrap_or(f64::INFINITY))
        .fold(0.0f64, f64::max);

    let endpoint_values_ok = h.eval(a).ok() == Some(ha)
        && h.eval(b).ok() == Some(hb)
        && h.eval(f.t()).ok() == Some(g.t());

    VerificationReport {
        max_residual,
        residual_argmax,
        grid_size: residuals.len(),
        monotonicity_ok,
        surjectivity_max_gap,
        orbit_pin_max_error,
        endpoint_values_ok,
        eval_failures,
    }
}

/// [`verify_homeomorphism`] for a built conjugacy against its own pair.
pub fn verify_conjugacy(phi: &Conjugacy, grid_n: usize, tol: f64) -> VerificationReport {
    let params = VerifyParams {
        grid_n,
        tol,
        endpoint_eps: phi.params().endpoint_eps,
        ..VerifyParams::default()
    };
    verify_homeomorphism(phi, phi.f(), phi.g(), &params)
}

/// `(h(x + step) − h(x)) / step`.
pub fn finite_difference_derivative<H: Homeomorphism>(h: &H, x: f64, step: f64) -> Result<f64> {
    if step == 0.0 || !step.is_finite() {
        return Err(Error::Argument(format!("finite-difference step {step} must be nonzero")));
    }
    Ok((h.eval(x + step)? - h.eval(x)?) / step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    /// Truncation of the infinite products.
    pub n: usize,
    /// Sample points per fundamental cell.
    pub samples: usize,
    pub eval: EvalParams,
}

impl Default for SmoothnessParams {
    fn default() -> Self {
        SmoothnessParams {
            n: 60,
            samples: 64,
            eval: EvalParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSample {
    pub x: f64,
    pub side: Side,
    pub n: usize,
    pub product: f64,
    pub cauchy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub condition_a_residuals: BTreeMap<String, f64>,
    pub product_samples: Vec<ProductSample>,
    #[serde(rename = "L1_estimate")]
    pub l1_estimate: f64,
    #[serde(rename = "L2_estimate")]
    pub l2_estimate: f64,
    /// Largest of the two per-cell spreads.
    pub constancy_spread: f64,
    pub spread_left: f64,
    pub spread_right: f64,
    pub fd_derivative_at_a: f64,
    pub fd_derivative_at_b: f64,
}

pub const COND_A_AT_T: &str = "phi_l0'(t) = phi_r0'(t)";
pub const COND_A_LEFT: &str = "phi_l0'(f_l(t)) = g_l'(s)/f_l'(t) * phi_l0'(t)";
pub const COND_A_RIGHT: &str = "phi_r0'(f_r(t)) = g_r'(s)/f_r'(t) * phi_r0'(t)";

/// Truncated products `φ₀'(x)·∏_{j<n} g'(gʲ(φ₀(x))) / f'(fʲ(x))` along one
/// side; returns `(P_n, P_{n−10})`.
fn truncated_product(
    fb: &crate::interval_map::Branch,
    gb: &crate::interval_map::Branch,
    x: f64,
    y: f64,
    slope: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let (mut u, mut v) = (x, y);
    let mut p = slope;
    let mut earlier = slope;
    let check_at = n.saturating_sub(10);
    for j in 0..n {
        if j == check_at {
            earlier = p;
        }
        p *= gb.derivative(v)? / fb.derivative(u)?;
        u = fb.eval(u);
        v = gb.eval(v);
    }
    if n == check_at {
        earlier = p;
    }
    Ok((p, earlier))
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Checks the C¹ criteria for a family A pair with `f(t) < t`, `g(s) < s`
/// and interior values at the jumps.
pub fn check_smoothness(
    f: &JumpMap,
    g: &JumpMap,
    init: &InitialHomeo,
    params: &SmoothnessParams,
) -> Result<SmoothnessReport> {
    if f.family() != Family::IncreasingA || g.family() != Family::IncreasingA {
        return Err(Error::Scope("only family A pairs are covered".into()));
    }
    let decision = decide_pair(f, g)?;
    if !(decision.conjugate && decision.case_pair == CasePair::C1) {
        return Err(Error::Scope(format!("case pair {:?}", decision.case_pair)));
    }
    let (t, s) = (f.t(), g.t());
    if !(f.value_at_t() < t && g.value_at_t() < s) {
        return Err(Error::Scope("requires f(t) < t and g(s) < s".into()));
    }
    if params.samples == 0 {
        return Err(Error::Argument("samples must be positive".into()));
    }
    for b in [f.left(), f.right(), g.left(), g.right()] {
        b.derivative(b.domain().lo)?;
    }
    let InitialHomeo::Split { left, right } = init else {
        return Err(Error::Scope("family A needs a split initial homeomorphism".into()));
    };

    let (fl, fr) = f.one_sided_limits();
    let dl_t = left.derivative(t);
    let dr_t = right.right_derivative(t);
    let mut cond = BTreeMap::new();
    cond.insert(COND_A_AT_T.to_string(), (dl_t - dr_t).abs());
    cond.insert(
        COND_A_LEFT.to_string(),
        (left.right_derivative(fl) - g.left().derivative(s)? / f.left().derivative(t)? * dl_t).abs(),
    );
    cond.insert(
        COND_A_RIGHT.to_string(),
        (right.derivative(fr) - g.right().derivative(s)? / f.right().derivative(t)? * dr_t).abs(),
    );

    let k = params.samples;
    let mut xs: Vec<(Side, f64)> = (1..=k)
        .map(|i| (Side::Left, fl + (t - fl) * (i as f64 / k as f64)))
        .collect();
    xs.extend((0..k).map(|i| (Side::Right, t + (fr - t) * (i as f64 / k as f64))));
    let n = params.n;
    let product_samples = xs
        .par_iter()
        .map(|&(side, x)| {
            let (piece, slope) = match side {
                Side::Left => (left, left.derivative(x)),
                Side::Right => (right, right.right_derivative(x)),
            };
            let (p, earlier) =
                truncated_product(f.branch(side), g.branch(side), x, piece.eval(x), slope, n)?;
            Ok(ProductSample {
                x,
                side,
                n,
                product: p,
                cauchy: (p - earlier).abs() <= 1e-10 * p.abs().max(1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let values = |side: Side| -> Vec<f64> {
        product_samples
            .iter()
            .filter(|p| p.side == side)
            .map(|p| p.product)
            .collect()
    };
    let (lv, rv) = (values(Side::Left), values(Side::Right));
    let (spread_left, spread_right) = (spread(&lv), spread(&rv));

    let phi = build_conjugacy(f, g, Some(init.clone()), params.eval)?;
    let Interval { lo: a, hi: b } = f.domain();
    let h = 1e-8 * (b - a);

    Ok(SmoothnessReport {
        condition_a_residuals: cond,
        product_samples,
        l1_estimate: mean(&lv),
        l2_estimate: mean(&rv),
        constancy_spread: spread_left.max(spread_right),
        spread_left,
        spread_right,
        fd_derivative_at_a: finite_difference_derivative(&phi, a, h)?,
        fd_derivative_at_b: finite_difference_derivative(&phi, b, -h)?,
    })
}
