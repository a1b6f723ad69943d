//! Strictly monotone interpolants through a set of knots: piecewise affine, or
//! a C¹ cubic Hermite scheme (Fritsch–Carlson) whose end slopes may be
//! prescribed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolantKind {
    PiecewiseAffine,
    MonotoneCubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterpolant", into = "RawInterpolant")]
pub struct MonotoneInterpolant {
    kind: InterpolantKind,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Knot derivatives; used by the cubic kind only.
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawInterpolant {
    kind: InterpolantKind,
    knots: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    slopes: Vec<f64>,
}

impl TryFrom<RawInterpolant> for MonotoneInterpolant {
    type Error = Error;

    fn try_from(raw: RawInterpolant) -> Result<Self> {
        match raw.kind {
            InterpolantKind::PiecewiseAffine => {
                MonotoneInterpolant::new(raw.kind, &raw.knots, None)
            }
            InterpolantKind::MonotoneCubic => {
                MonotoneInterpolant::cubic_with_slopes(&raw.knots, raw.slopes)
            }
        }
    }
}

impl From<MonotoneInterpolant> for RawInterpolant {
    fn from(m: MonotoneInterpolant) -> Self {
        RawInterpolant {
            kind: m.kind,
            knots: m.knots(),
            slopes: m.slopes,
        }
    }
}

fn check_knots(knots: &[(f64, f64)]) -> Result<bool> {
    if knots.len() < 2 {
        return Err(Error::Init("an interpolant needs at least two knots".into()));
    }
    if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("knots"));
    }
    let increasing = knots[1].1 > knots[0].1;
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x1 <= x0 {
            return Err(Error::PinOrder(format!("knot abscissae {x0} and {x1} not increasing")));
        }
        if (y1 > y0) != increasing || y1 == y0 {
            return Err(Error::PinOrder(format!(
                "knot values {y0} -> {y1} break strict monotonicity"
            )));
        }
    }
    Ok(increasing)
}

/// Whether the cubic Hermite segment with normalized end slopes `alpha`,
/// `beta` (slope / secant) is monotone; exact region from Fritsch & Carlson.
fn hermite_segment_monotone(alpha: f64, beta: f64) -> bool {
    if alpha < 0.0 || beta < 0.0 {
        return false;
    }
    let s = alpha + beta - 2.0;
    if s <= 0.0 || 2.0 * alpha + beta - 3.0 <= 0.0 || alpha + 2.0 * beta - 3.0 <= 0.0 {
        return true;
    }
    alpha - (2.0 * alpha + beta - 3.0).powi(2) / (3.0 * s) >= 0.0
}

impl MonotoneInterpolant {
    /// Builds an interpolant through `knots` (sorted by x, strictly monotone
    /// in y). `endpoint_slopes` only applies to the cubic kind; without it the
    /// end slopes come from the usual shape-preserving three-point formula.
    pub fn new(
        kind: InterpolantKind,
        knots: &[(f64, f64)],
        endpoint_slopes: Option<(f64, f64)>,
    ) -> Result<Self> {
        check_knots(knots)?;
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let slopes = match kind {
            InterpolantKind::PiecewiseAffine => Vec::new(),
            InterpolantKind::MonotoneCubic => pchip_slopes(&xs, &ys, endpoint_slopes),
        };
        let m = MonotoneInterpolant {
            kind,
            xs,
            ys,
            slopes,
        };
        m.check_cubic_monotone()?;
        Ok(m)
    }

    fn cubic_with_slopes(knots: &[(f64, f64)], slopes: Vec<f64>) -> Result<Self> {
        check_knots(knots)?;
        if slopes.len() != knots.len() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::Init("cubic interpolant needs one finite slope per knot".into()));
        }
        let m = MonotoneInterpolant {
            kind: InterpolantKind::MonotoneCubic,
            xs: knots.iter().map(|k| k.0).collect(),
            ys: knots.iter().map(|k| k.1).collect(),
            slopes,
        };
        m.check_cubic_monotone()?;
        Ok(m)
    }

    fn check_cubic_monotone(&self) -> Result<()> {
        if self.kind != InterpolantKind::MonotoneCubic {
            return Ok(());
        }
        for i in 0..self.xs.len() - 1 {
            let secant = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
            let (alpha, beta) = (self.slopes[i] / secant, self.slopes[i + 1] / secant);
            if !hermite_segment_monotone(alpha, beta) {
                return Err(Error::Init(format!(
                    "slopes ({}, {}) make the cubic non-monotone on [{}, {}]",
                    self.slopes[i],
                    self.slopes[i + 1],
                    self.xs[i],
                    self.xs[i + 1]
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> InterpolantKind {
        self.kind
    }

    pub fn knots(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.ys.iter().copied()).collect()
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn first_value(&self) -> f64 {
        self.ys[0]
    }

    pub fn last_value(&self) -> f64 {
        self.ys[self.ys.len() - 1]
    }

    pub fn is_increasing(&self) -> bool {
        self.ys[1] > self.ys[0]
    }

    /// Segment `i` with `xs[i] <= x <= xs[i+1]`; the left one at shared knots.
    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&k| k < x);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }

    /// Value at `x`, clamped to the knot range. Knots map exactly to their
    /// values.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = self.segment(x);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        if x == x0 {
            return y0;
        }
        if x == x1 {
            return y1;
        }
        let h = x1 - x0;
        match self.kind {
            InterpolantKind::PiecewiseAffine => y0 + (y1 - y0) * ((x - x0) / h),
            InterpolantKind::MonotoneCubic => {
                let s = (x - x0) / h;
                let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
            }
        }
    }

    /// Derivative at `x`; at an interior knot of the affine kind this is the
    /// slope of the segment to its left.
    pub fn derivative(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo(), self.hi());
        let i = self.segment(x);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        let h = x1 - x0;
        match self.kind {
            InterpolantKind::PiecewiseAffine => (y1 - y0) / h,
            InterpolantKind::MonotoneCubic => {
                let s = (x - x0) / h;
                let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let d00 = 6.0 * s2 - 6.0 * s;
                let d10 = 3.0 * s2 - 4.0 * s + 1.0;
                let d01 = -6.0 * s2 + 6.0 * s;
                let d11 = 3.0 * s2 - 2.0 * s;
                (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1
            }
        }
    }

    /// Derivative at the low end of the segment containing `x`'s right
    /// neighbourhood; differs from [`derivative`](Self::derivative) only at
    /// interior knots of the affine kind.
    pub fn right_derivative(&self, x: f64) -> f64 {
        match self.kind {
            InterpolantKind::MonotoneCubic => self.derivative(x),
            InterpolantKind::PiecewiseAffine => {
                let x = x.clamp(self.lo(), self.hi());
                let k = self.xs.partition_point(|&k| k <= x);
                let i = k.saturating_sub(1).min(self.xs.len() - 2);
                (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            }
        }
    }
}

/// Knot slopes: weighted harmonic means of neighbouring secants in the
/// interior, prescribed or three-point end slopes.
fn pchip_slopes(xs: &[f64], ys: &[f64], endpoint_slopes: Option<(f64, f64)>) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        let (d0, d1) = (delta[i - 1], delta[i]);
        if d0 * d1 > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    match endpoint_slopes {
        Some((m0, m1)) => {
            m[0] = m0;
            m[n - 1] = m1;
        }
        None if n == 2 => {
            m[0] = delta[0];
            m[1] = delta[0];
        }
        None => {
            m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
    }
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn affine_segments_through_pins() {
        let m = MonotoneInterpolant::new(
            InterpolantKind::PiecewiseAffine,
            &[(0.125, 0.125), (0.1875, 0.3125), (0.25, 0.5)],
            None,
        )
        .unwrap();
        assert_eq!(m.eval(0.1875), 0.3125);
        assert_eq!(m.derivative(0.15), 3.0);
        assert_eq!(m.derivative(0.2), 3.0);
        assert!((m.eval(0.2) - 0.35).abs() < 1e-15);
        assert!(m.is_increasing());
    }

    #[test]
    fn decreasing_knots_are_supported() {
        let m = MonotoneInterpolant::new(
            InterpolantKind::MonotoneCubic,
            &[(0.0, 1.0), (0.3, 0.8), (1.0, 0.0)],
            None,
        )
        .unwrap();
        assert!(!m.is_increasing());
        let mut prev = m.eval(0.0);
        for i in 1..=1000 {
            let y = m.eval(i as f64 / 1000.0);
            assert!(y < prev);
            prev = y;
        }
    }

    #[test]
    fn rejects_unordered_knots() {
        let e = MonotoneInterpolant::new(
            InterpolantKind::PiecewiseAffine,
            &[(0.0, 0.0), (0.5, 0.6), (1.0, 0.4)],
            None,
        )
        .unwrap_err();
        assert!(matches!(e, Error::PinOrder(_)));
        let e = MonotoneInterpolant::new(InterpolantKind::PiecewiseAffine, &[(0.0, 0.0)], None)
            .unwrap_err();
        assert!(matches!(e, Error::Init(_)));
    }

    #[test]
    fn prescribed_slopes_are_honoured_or_rejected() {
        let knots = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)];
        let m = MonotoneInterpolant::new(InterpolantKind::MonotoneCubic, &knots, Some((0.2, 1.7)))
            .unwrap();
        assert!((m.derivative(0.0) - 0.2).abs() < 1e-14);
        assert!((m.derivative(1.0) - 1.7).abs() < 1e-14);
        let e = MonotoneInterpolant::new(InterpolantKind::MonotoneCubic, &knots, Some((5.0, 1.0)))
            .unwrap_err();
        assert!(matches!(e, Error::Init(_)));
    }

    #[test]
    fn collinear_cubic_reproduces_the_line() {
        let knots: Vec<(f64, f64)> = [0.0, 0.2, 0.35, 1.0].iter().map(|&x| (x, 2.0 * x + 1.0)).collect();
        let m = MonotoneInterpolant::new(InterpolantKind::MonotoneCubic, &knots, Some((2.0, 2.0)))
            .unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((m.eval(x) - (2.0 * x + 1.0)).abs() < 1e-14);
            assert!((m.derivative(x) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_round_trip_keeps_slopes() {
        let m = MonotoneInterpolant::new(
            InterpolantKind::MonotoneCubic,
            &[(0.0, 0.0), (0.4, 0.7), (1.0, 1.0)],
            Some((1.0, 0.5)),
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: MonotoneInterpolant = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }

    fn knots_strategy() -> impl Strategy<Value = (Vec<(f64, f64)>, bool)> {
        (
            prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 2..8),
            any::<bool>(),
        )
            .prop_map(|(steps, inc)| {
                let mut x = 0.0;
                let mut y = 0.0;
                let mut knots = vec![(0.0, 0.0)];
                for (dx, dy) in steps {
                    x += dx;
                    y += if inc { dy } else { -dy };
                    knots.push((x, y));
                }
                (knots, inc)
            })
    }

    proptest! {
        #[test]
        fn cubic_is_monotone_between_knots((knots, inc) in knots_strategy()) {
            let m = MonotoneInterpolant::new(InterpolantKind::MonotoneCubic, &knots, None).unwrap();
            let (lo, hi) = (m.lo(), m.hi());
            let mut prev = m.eval(lo);
            for i in 1..=500 {
                let y = m.eval(lo + (hi - lo) * i as f64 / 500.0);
                if inc { prop_assert!(y >= prev - 1e-14); } else { prop_assert!(y <= prev + 1e-14); }
                prev = y;
            }
            for &(x, y) in &knots {
                prop_assert_eq!(m.eval(x), y);
            }
        }

        #[test]
        fn monotone_region_matches_dense_sampling(alpha in 0.0f64..5.0, beta in 0.0f64..5.0) {
            // unit segment 0 -> 1, secant 1
            let p = |s: f64| {
                let (s2, s3) = (s * s, s * s * s);
                (s3 - 2.0 * s2 + s) * alpha + (-2.0 * s3 + 3.0 * s2) + (s3 - s2) * beta
            };
            let mut sampled = true;
            let mut prev = p(0.0);
            for i in 1..=4000 {
                let y = p(i as f64 / 4000.0);
                if y < prev - 1e-12 { sampled = false; break; }
                prev = y;
            }
            // dense sampling can miss a shallow dip, so only one direction is exact
            if hermite_segment_monotone(alpha, beta) {
                prop_assert!(sampled);
            }
        }
    }
}
