//! Shared test support: an exact rational re-derivation of the construction
//! and a deterministic corpus of random affine maps.
#![allow(dead_code)]

use jumpconj::mapspec::{MapSpec, Scalar};
use jumpconj::{Family, JumpKind, JumpMap, Orientation, Side};
use num::{BigRational, One, Signed, Zero};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

pub type Q = BigRational;

pub fn q(v: f64) -> Q {
    Q::from_float(v).expect("finite")
}

pub fn qr(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

pub fn to_f(x: &Q) -> f64 {
    use num::ToPrimitive;
    x.to_f64().expect("representable")
}

/// Affine jump map in exact arithmetic.
#[derive(Clone, Debug)]
pub struct QMap {
    pub a: Q,
    pub b: Q,
    pub t: Q,
    pub v: Q,
    pub l: (Q, Q),
    pub r: (Q, Q),
    pub family: Family,
}

impl QMap {
    pub fn from_map(m: &JumpMap) -> QMap {
        let c = |side: Side| {
            let k = m.branch(side).coefficients().expect("affine branch");
            (q(k[0]), q(k[1]))
        };
        QMap {
            a: q(m.domain().lo),
            b: q(m.domain().hi),
            t: q(m.t()),
            v: q(m.value_at_t()),
            l: c(Side::Left),
            r: c(Side::Right),
            family: m.family(),
        }
    }

    /// Exact map from a spec, keeping `[p, q]` numbers rational.
    pub fn from_spec(spec: &MapSpec) -> QMap {
        let v = |s: &Scalar| match *s {
            Scalar::Decimal(x) => q(x),
            Scalar::Ratio(p, d) => qr(p, d),
        };
        let c = |b: &jumpconj::mapspec::BranchSpec| (v(&b.coeffs[0]), v(&b.coeffs[1]));
        QMap {
            a: v(&spec.domain[0]),
            b: v(&spec.domain[1]),
            t: v(&spec.t),
            v: v(&spec.value_at_t),
            l: c(&spec.left),
            r: c(&spec.right),
            family: spec.family,
        }
    }

    pub fn branch(&self, side: Side, x: &Q) -> Q {
        let (c0, c1) = match side {
            Side::Left => &self.l,
            Side::Right => &self.r,
        };
        c0 + c1 * x
    }

    pub fn inv(&self, side: Side, y: &Q) -> Q {
        let (c0, c1) = match side {
            Side::Left => &self.l,
            Side::Right => &self.r,
        };
        (y - c0) / c1
    }

    pub fn eval(&self, x: &Q) -> Q {
        if *x < self.t {
            self.branch(Side::Left, x)
        } else if *x > self.t {
            self.branch(Side::Right, x)
        } else {
            self.v.clone()
        }
    }

    pub fn limits(&self) -> (Q, Q) {
        (self.branch(Side::Left, &self.t), self.branch(Side::Right, &self.t))
    }

    pub fn interior(&self) -> bool {
        let (l, r) = self.limits();
        self.v != l && self.v != r
    }
}

/// The pins every conjugacy must pass through, straight from the lists.
pub fn qpins(f: &QMap, g: &QMap, inc: bool) -> Vec<(Q, Q)> {
    let (fl, fr) = f.limits();
    let (gl, gr) = g.limits();
    let mut p = if inc {
        vec![
            (f.a.clone(), g.a.clone()),
            (f.b.clone(), g.b.clone()),
            (fl.clone(), gl.clone()),
            (fr.clone(), gr.clone()),
        ]
    } else {
        vec![
            (f.a.clone(), g.b.clone()),
            (f.b.clone(), g.a.clone()),
            (fr.clone(), gl.clone()),
            (fl.clone(), gr.clone()),
        ]
    };
    p.push((f.t.clone(), g.t.clone()));
    if f.interior() {
        p.push((f.v.clone(), g.v.clone()));
    }
    if f.family == Family::DecreasingB {
        let ffl = f.branch(Side::Right, &fl);
        let ffr = f.branch(Side::Left, &fr);
        let ggl = g.branch(Side::Right, &gl);
        let ggr = g.branch(Side::Left, &gr);
        if inc {
            p.push((ffl, ggl));
            p.push((ffr, ggr));
        } else {
            p.push((ffr, ggl));
            p.push((ffl, ggr));
        }
    }
    p.sort_by(|x, y| x.0.cmp(&y.0));
    p.dedup_by(|x, y| x.0 == y.0);
    p
}

fn pl(knots: &[(Q, Q)], x: &Q) -> Q {
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        if x >= x0 && x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    panic!("x outside the knots")
}

/// Exact conjugacy with piecewise affine initial pieces through the pins.
pub struct QConj {
    pub f: QMap,
    pub g: QMap,
    pub inc: bool,
    pieces: Vec<Vec<(Q, Q)>>,
}

impl QConj {
    pub fn new(f: QMap, g: QMap, inc: bool) -> QConj {
        let pins = qpins(&f, &g, inc);
        let (fl, fr) = f.limits();
        let within = |lo: &Q, hi: &Q| -> Vec<(Q, Q)> {
            pins.iter().filter(|(x, _)| x >= lo && x <= hi).cloned().collect()
        };
        let pieces = match f.family {
            Family::IncreasingA => vec![within(&fl, &f.t), within(&f.t, &fr)],
            Family::DecreasingB => {
                let e2 = f.branch(Side::Right, &fl);
                let mut core = within(&e2, &f.t);
                if f.interior() && f.v > f.t {
                    core.push((f.eval(&f.v), g.eval(&g.v)));
                    core.sort_by(|x, y| x.0.cmp(&y.0));
                    core.dedup_by(|x, y| x.0 == y.0);
                }
                vec![core]
            }
        };
        QConj { f, g, inc, pieces }
    }

    pub fn pieces(&self) -> &[Vec<(Q, Q)>] {
        &self.pieces
    }

    fn g_side(&self, f_side: Side) -> Side {
        if self.inc {
            f_side
        } else {
            f_side.opposite()
        }
    }

    /// φ(x) by recursion on φ(f(z)) = g(φ(z)).
    pub fn phi(&self, x: &Q) -> Q {
        let (f, g) = (&self.f, &self.g);
        let (ea, eb) = if self.inc {
            (g.a.clone(), g.b.clone())
        } else {
            (g.b.clone(), g.a.clone())
        };
        if *x == f.a {
            return ea;
        }
        if *x == f.b {
            return eb;
        }
        if *x == f.t {
            return g.t.clone();
        }
        let (fl, fr) = f.limits();
        match f.family {
            Family::IncreasingA => {
                if *x < f.t {
                    if *x > fl {
                        pl(&self.pieces[0], x)
                    } else {
                        let z = f.inv(Side::Left, x);
                        g.branch(self.g_side(Side::Left), &self.phi(&z))
                    }
                } else if *x < fr {
                    pl(&self.pieces[1], x)
                } else {
                    let z = f.inv(Side::Right, x);
                    g.branch(self.g_side(Side::Right), &self.phi(&z))
                }
            }
            Family::DecreasingB => {
                let e2 = f.branch(Side::Right, &fl);
                if *x < f.t {
                    if *x >= e2 {
                        pl(&self.pieces[0], x)
                    } else {
                        let z = f.inv(Side::Right, x);
                        g.branch(self.g_side(Side::Right), &self.phi(&z))
                    }
                } else if *x < fl {
                    let u = f.branch(Side::Right, x);
                    g.inv(self.g_side(Side::Right), &self.phi(&u))
                } else {
                    let z = f.inv(Side::Left, x);
                    g.branch(self.g_side(Side::Left), &self.phi(&z))
                }
            }
        }
    }
}

pub fn abs_diff(x: f64, y: &Q) -> f64 {
    to_f(&(q(x) - y).abs())
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Parameters of a random affine map on `[0, 1]`. All values are dyadic, so
/// the floating-point map is exactly the rational one.
#[derive(Clone, Copy, Debug)]
pub struct AffineParams {
    pub family: Family,
    pub t: f64,
    pub lambda: f64,
    pub mu: f64,
    pub kind: JumpKind,
    /// Position of an interior value inside the bracket, in 64ths.
    pub pos: u32,
}

impl AffineParams {
    pub fn limits(&self) -> (f64, f64) {
        match self.family {
            Family::IncreasingA => (self.lambda * self.t, 1.0 - self.mu * (1.0 - self.t)),
            Family::DecreasingB => (1.0 - self.lambda * self.t, self.mu * (1.0 - self.t)),
        }
    }

    pub fn value(&self) -> f64 {
        let (l, r) = self.limits();
        match self.kind {
            JumpKind::AttainsLeft => l,
            JumpKind::AttainsRight => r,
            JumpKind::Interior => l + (r - l) * (self.pos as f64 / 64.0),
        }
    }

    pub fn admissible(&self) -> bool {
        let (l, r) = self.limits();
        let straddle = match self.family {
            Family::IncreasingA => l < self.t && self.t < r,
            Family::DecreasingB => r < self.t && self.t < l,
        };
        straddle && (self.kind != JumpKind::Interior || (self.value() - self.t).abs() > 1e-3)
    }

    pub fn map(&self) -> JumpMap {
        let (left, right) = match self.family {
            Family::IncreasingA => ((0.0, self.lambda), (1.0 - self.mu, self.mu)),
            Family::DecreasingB => ((1.0, -self.lambda), (self.mu, -self.mu)),
        };
        JumpMap::affine(0.0, 1.0, self.t, left, right, self.value(), self.family).unwrap()
    }
}

fn dyadic(lo: u32, hi: u32) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|k| k as f64 / 1024.0)
}

pub fn affine_params(family: Family) -> impl Strategy<Value = AffineParams> {
    let kind = proptest::prop_oneof![
        2 => proptest::strategy::Just(JumpKind::Interior),
        1 => proptest::strategy::Just(JumpKind::AttainsLeft),
        1 => proptest::strategy::Just(JumpKind::AttainsRight),
    ];
    // slopes in [0.3, 0.7] keep every orbit depth and every conjugacy's
    // endpoint behaviour within double precision
    (dyadic(256, 768), dyadic(307, 717), dyadic(307, 717), kind, 3u32..=61)
        .prop_map(move |(t, lambda, mu, kind, pos)| AffineParams {
            family,
            t,
            lambda,
            mu,
            kind,
            pos,
        })
        .prop_filter("must belong to the family", |p| p.admissible())
}

/// `count` maps of one family, the same on every run.
pub fn corpus(family: Family, count: usize) -> Vec<AffineParams> {
    let mut runner = TestRunner::deterministic();
    let strat = affine_params(family);
    (0..count)
        .map(|_| strat.new_tree(&mut runner).expect("generated").current())
        .collect()
}

/// Orientation forced on a pair, from the kinds alone.
pub fn expected_orientation(f: &AffineParams, g: &AffineParams) -> Option<Orientation> {
    use JumpKind::*;
    match (f.kind, g.kind) {
        (Interior, Interior) => {
            let same = (f.value() > f.t) == (g.value() > g.t);
            Some(if same {
                Orientation::Increasing
            } else {
                Orientation::Decreasing
            })
        }
        (Interior, _) | (_, Interior) => None,
        (x, y) if x == y => Some(Orientation::Increasing),
        _ => Some(Orientation::Decreasing),
    }
}

pub fn example_one() -> (JumpMap, JumpMap) {
    let (f, g) = jumpconj::corpus::example_one();
    (f.to_map().unwrap(), g.to_map().unwrap())
}

pub fn example_two() -> (JumpMap, JumpMap) {
    let (f, g) = jumpconj::corpus::example_two();
    (f.to_map().unwrap(), g.to_map().unwrap())
}

/// Exact versions of the two example pairs.
pub fn example_one_q() -> (QMap, QMap) {
    let (f, g) = jumpconj::corpus::example_one();
    (QMap::from_spec(&f), QMap::from_spec(&g))
}

pub fn example_two_q() -> (QMap, QMap) {
    let (f, g) = jumpconj::corpus::example_two();
    (QMap::from_spec(&f), QMap::from_spec(&g))
}
