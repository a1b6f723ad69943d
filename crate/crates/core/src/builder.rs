//! Conjugacies between two maps of the same family, assembled from a free
//! initial homeomorphism on the fundamental domain and propagated by the
//! dynamics.
//!
//! For family A the domain is split in two pieces, `[f_l(t), t]` and
//! `[t, f_r(t)]`; a point of cell `n` is pulled back by `n` inversions of its
//! branch, sent through the initial piece and pushed forward by `n` steps of
//! the paired branch of `g`. With decreasing orientation the left branch of
//! `f` pairs with the right branch of `g` and vice versa.
//!
//! For family B there is one core piece `[f_e²(t), t]`. Cells on both sides of
//! the jump are reached from it by alternating branches, and the gap
//! `(t, f_e(t))` is filled by `x ↦ g_*⁻¹(ψ₀(f_r(x)))`, where `g_*` is the
//! branch of `g` on the matching side of `s`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{InterpolantKind, MonotoneInterpolant};
use crate::interval_map::{decide_pair, Family, Interval, JumpKind, JumpMap, Orientation, Side};
use crate::orbit::{boundary_orbit, Cell, End, OrbitPartition, DEFAULT_ENDPOINT_EPS, DEFAULT_N_MAX};

pub const DEFAULT_INV_TOL: f64 = 1e-13;

/// Relative tolerance used when merging and checking pins.
const PIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub inv_tol: f64,
    pub n_max: usize,
    pub endpoint_eps: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            inv_tol: DEFAULT_INV_TOL,
            n_max: DEFAULT_N_MAX,
            endpoint_eps: DEFAULT_ENDPOINT_EPS,
        }
    }
}

impl EvalParams {
    pub fn check(&self) -> Result<()> {
        if !(self.inv_tol >= 0.0 && self.inv_tol.is_finite()) {
            return Err(Error::Argument(format!("inv_tol = {} must be finite and >= 0", self.inv_tol)));
        }
        if !(self.endpoint_eps >= 0.0 && self.endpoint_eps.is_finite()) {
            return Err(Error::Argument(format!(
                "endpoint_eps = {} must be finite and >= 0",
                self.endpoint_eps
            )));
        }
        Ok(())
    }
}

/// Graph points every conjugacy with the given orientation passes through,
/// sorted by `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedPoints {
    pub orientation: Orientation,
    pub points: Vec<(f64, f64)>,
}

impl PinnedPoints {
    /// Pins with `lo <= x <= hi` (up to the merge tolerance).
    pub fn within(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let tol = PIN_TOL * (hi - lo).abs().max(lo.abs()).max(hi.abs());
        self.points
            .iter()
            .copied()
            .filter(|&(x, _)| x >= lo - tol && x <= hi + tol)
            .collect()
    }

    /// The `y` pinned at `x`, if any.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == x).map(|p| p.1)
    }
}

fn scale(m: &JumpMap) -> f64 {
    let d = m.domain();
    d.width().max(d.lo.abs()).max(d.hi.abs())
}

/// Sorts by `x`, merges coincident pins and checks strict monotonicity.
fn merge_pins(mut pts: Vec<(f64, f64)>, increasing: bool, xtol: f64, ytol: f64) -> Result<Vec<(f64, f64)>> {
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, y) in pts {
        if let Some(&(px, py)) = out.last() {
            if (x - px).abs() <= xtol {
                if (y - py).abs() > ytol {
                    return Err(Error::PinOrder(format!(
                        "x = {x} is pinned to both {py} and {y}"
                    )));
                }
                continue;
            }
            if (y > py) != increasing || (y - py).abs() <= ytol {
                return Err(Error::PinOrder(format!(
                    "pins ({px}, {py}) and ({x}, {y}) are not {}",
                    if increasing { "increasing" } else { "decreasing" }
                )));
            }
        }
        out.push((x, y));
    }
    Ok(out)
}

fn require_orientation(f: &JumpMap, g: &JumpMap, o: Orientation) -> Result<()> {
    let d = decide_pair(f, g)?;
    if !d.conjugate {
        return Err(Error::NotConjugate(format!("case pair {:?}", d.case_pair)));
    }
    if d.orientation != Some(o) {
        return Err(Error::NotConjugate(format!(
            "every conjugacy of this pair is {:?}",
            d.orientation.expect("conjugate pairs carry an orientation")
        )));
    }
    Ok(())
}

pub fn pinned_points(f: &JumpMap, g: &JumpMap, o: Orientation) -> Result<PinnedPoints> {
    require_orientation(f, g, o)?;
    let Interval { lo: a, hi: b } = f.domain();
    let Interval { lo: c, hi: d } = g.domain();
    let (t, s) = (f.t(), g.t());
    let (fl, fr) = f.one_sided_limits();
    let (gl, gr) = g.one_sided_limits();
    let inc = o == Orientation::Increasing;

    let mut pts = if inc {
        vec![(a, c), (b, d), (t, s), (fl, gl), (fr, gr)]
    } else {
        vec![(a, d), (b, c), (t, s), (fr, gl), (fl, gr)]
    };
    if f.classify() == JumpKind::Interior {
        pts.push((f.value_at_t(), g.value_at_t()));
    }
    if f.family() == Family::DecreasingB {
        let (ffl, ffr) = (f.right().eval(fl), f.left().eval(fr));
        let (ggl, ggr) = (g.right().eval(gl), g.left().eval(gr));
        if inc {
            pts.extend([(ffl, ggl), (ffr, ggr)]);
        } else {
            pts.extend([(ffr, ggl), (ffl, ggr)]);
        }
    }
    let points = merge_pins(pts, inc, PIN_TOL * scale(f), PIN_TOL * scale(g))?;
    Ok(PinnedPoints {
        orientation: o,
        points,
    })
}

/// Knots and optional end slopes for one piece of an initial homeomorphism.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    /// Extra knots, merged with the mandatory pins of the piece.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub knots: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_slopes: Option<(f64, f64)>,
}

/// User description of an initial homeomorphism. `left`/`right` apply to
/// family A, `core` to family B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub interpolant: InterpolantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<PieceSpec>,
}

impl InitSpec {
    pub fn of_kind(interpolant: InterpolantKind) -> Self {
        InitSpec {
            interpolant,
            left: None,
            right: None,
            core: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum InitialHomeo {
    /// Family A: `φ_l0` on `[f_l(t), t]` and `φ_r0` on `[t, f_r(t)]`.
    #[serde(rename = "A")]
    Split {
        left: MonotoneInterpolant,
        right: MonotoneInterpolant,
    },
    /// Family B: `ψ₀` on `[f_e²(t), t]`.
    #[serde(rename = "B")]
    Core { core: MonotoneInterpolant },
}

impl InitialHomeo {
    pub fn family(&self) -> Family {
        match self {
            InitialHomeo::Split { .. } => Family::IncreasingA,
            InitialHomeo::Core { .. } => Family::DecreasingB,
        }
    }

    fn pieces(&self) -> Vec<&MonotoneInterpolant> {
        match self {
            InitialHomeo::Split { left, right } => vec![left, right],
            InitialHomeo::Core { core } => vec![core],
        }
    }
}

/// Domains of the initial pieces: `[f_l(t), t]`, `[t, f_r(t)]` for family A and
/// `[f_e²(t), t]` for family B.
pub fn fundamental_domains(f: &JumpMap) -> Vec<Interval> {
    let t = f.t();
    let (fl, fr) = f.one_sided_limits();
    match f.family() {
        Family::IncreasingA => vec![Interval { lo: fl, hi: t }, Interval { lo: t, hi: fr }],
        Family::DecreasingB => vec![Interval {
            lo: f.right().eval(fl),
            hi: t,
        }],
    }
}

/// Knots each piece must interpolate, in the order of [`fundamental_domains`].
fn required_knots(f: &JumpMap, g: &JumpMap, pins: &PinnedPoints) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = fundamental_domains(f)
        .iter()
        .map(|dom| pins.within(dom.lo, dom.hi))
        .collect();
    if f.family() == Family::DecreasingB
        && f.classify() == JumpKind::Interior
        && f.value_at_t() > f.t()
    {
        // f(t) sits in the gap; its pin reaches ψ₀ through one more step.
        out[0].push((
            f.eval_unchecked(f.value_at_t()),
            g.eval_unchecked(g.value_at_t()),
        ));
    }
    out
}

fn piece_spec(spec: &InitSpec, family: Family, index: usize) -> Option<&PieceSpec> {
    match (family, index) {
        (Family::IncreasingA, 0) => spec.left.as_ref(),
        (Family::IncreasingA, _) => spec.right.as_ref(),
        (Family::DecreasingB, _) => spec.core.as_ref(),
    }
}

/// Initial homeomorphism through the mandatory pins plus whatever `spec`
/// adds.
pub fn initial_homeo_from_spec(
    f: &JumpMap,
    g: &JumpMap,
    o: Orientation,
    spec: &InitSpec,
) -> Result<InitialHomeo> {
    let pins = pinned_points(f, g, o)?;
    let inc = o == Orientation::Increasing;
    let (xtol, ytol) = (PIN_TOL * scale(f), PIN_TOL * scale(g));
    let domains = fundamental_domains(f);
    let mut pieces = Vec::new();
    for (i, required) in required_knots(f, g, &pins).into_iter().enumerate() {
        let dom = domains[i];
        let mut knots = required;
        let extra = piece_spec(spec, f.family(), i);
        if let Some(p) = extra {
            for &(x, y) in &p.knots {
                if !(x > dom.lo && x < dom.hi) {
                    return Err(Error::Init(format!(
                        "knot x = {x} lies outside the open piece ({}, {})",
                        dom.lo, dom.hi
                    )));
                }
                knots.push((x, y));
            }
        }
        let knots = merge_pins(knots, inc, xtol, ytol)?;
        let slopes = extra.and_then(|p| p.endpoint_slopes);
        pieces.push(MonotoneInterpolant::new(spec.interpolant, &knots, slopes)?);
    }
    Ok(match f.family() {
        Family::IncreasingA => {
            let right = pieces.pop().expect("two pieces");
            let left = pieces.pop().expect("two pieces");
            InitialHomeo::Split { left, right }
        }
        Family::DecreasingB => InitialHomeo::Core {
            core: pieces.pop().expect("one piece"),
        },
    })
}

pub fn default_initial_homeo(
    f: &JumpMap,
    g: &JumpMap,
    o: Orientation,
    kind: InterpolantKind,
) -> Result<InitialHomeo> {
    initial_homeo_from_spec(f, g, o, &InitSpec::of_kind(kind))
}

/// A conjugacy `φ` with `φ∘f = g∘φ`, evaluated lazily.
#[derive(Debug, Clone)]
pub struct Conjugacy {
    f: JumpMap,
    g: JumpMap,
    orientation: Orientation,
    init: InitialHomeo,
    pins: PinnedPoints,
    f_orbit: OrbitPartition,
    g_orbit: OrbitPartition,
    params: EvalParams,
}

pub fn build_conjugacy_a(
    f: &JumpMap,
    g: &JumpMap,
    init: Option<InitialHomeo>,
    params: EvalParams,
) -> Result<Conjugacy> {
    if f.family() != Family::IncreasingA || g.family() != Family::IncreasingA {
        return Err(Error::NotComparable(f.family(), g.family()));
    }
    build_conjugacy(f, g, init, params)
}

pub fn build_conjugacy_b(
    f: &JumpMap,
    g: &JumpMap,
    init: Option<InitialHomeo>,
    params: EvalParams,
) -> Result<Conjugacy> {
    if f.family() != Family::DecreasingB || g.family() != Family::DecreasingB {
        return Err(Error::NotComparable(f.family(), g.family()));
    }
    build_conjugacy(f, g, init, params)
}

/// Builds the conjugacy for either family. Without `init` the piecewise
/// affine interpolant through the pins is used.
pub fn build_conjugacy(
    f: &JumpMap,
    g: &JumpMap,
    init: Option<InitialHomeo>,
    params: EvalParams,
) -> Result<Conjugacy> {
    let decision = decide_pair(f, g)?;
    let o = match decision.orientation {
        Some(o) if decision.conjugate => o,
        _ => {
            return Err(Error::NotConjugate(format!(
                "case pair {:?}",
                decision.case_pair
            )))
        }
    };
    let init = match init {
        Some(i) => i,
        None => default_initial_homeo(f, g, o, InterpolantKind::PiecewiseAffine)?,
    };
    let phi = Conjugacy::assemble(f, g, o, init, params)?;
    phi.check_init_pins()?;
    log::debug!(
        "built {:?} conjugacy, orbit depth {}",
        o,
        phi.f_orbit.depth
    );
    Ok(phi)
}

impl Conjugacy {
    /// Assembles a conjugacy without checking that `init` passes through the
    /// pins. Structure (piece domains, orientation, `φ(t) = s`, composition
    /// domains) is still checked. Meant for experiments with deliberately
    /// wrong initial maps; [`build_conjugacy`] is the checked entry point.
    pub fn assemble(
        f: &JumpMap,
        g: &JumpMap,
        orientation: Orientation,
        init: InitialHomeo,
        params: EvalParams,
    ) -> Result<Conjugacy> {
        params.check()?;
        if f.family() != g.family() {
            return Err(Error::NotComparable(f.family(), g.family()));
        }
        if init.family() != f.family() {
            return Err(Error::Init(format!(
                "initial homeomorphism is for family {:?}, maps are {:?}",
                init.family(),
                f.family()
            )));
        }
        let pins = pinned_points(f, g, orientation)?;
        let f_orbit = boundary_orbit(f, params.n_max, params.endpoint_eps)?;
        let g_orbit = boundary_orbit(g, params.n_max, params.endpoint_eps)?;
        let min_len = match f.family() {
            Family::IncreasingA => 2,
            Family::DecreasingB => 3,
        };
        let short = |p: &OrbitPartition| match &p.points {
            crate::orbit::OrbitPoints::Split { left, right } => left.len().min(right.len()) < min_len,
            crate::orbit::OrbitPoints::Alternating { points } => points.len() < min_len,
        };
        if short(&f_orbit) {
            return Err(Error::Argument(format!(
                "n_max = {} leaves no fundamental domain",
                params.n_max
            )));
        }

        let inc = orientation == Orientation::Increasing;
        let domains = fundamental_domains(f);
        let xtol = PIN_TOL * scale(f);
        let ytol = PIN_TOL * scale(g);
        let s = g.t();
        for (piece, dom) in init.pieces().into_iter().zip(&domains) {
            if (piece.lo() - dom.lo).abs() > xtol || (piece.hi() - dom.hi).abs() > xtol {
                return Err(Error::Init(format!(
                    "piece on [{}, {}] should cover [{}, {}]",
                    piece.lo(),
                    piece.hi(),
                    dom.lo,
                    dom.hi
                )));
            }
            if piece.is_increasing() != inc {
                return Err(Error::Init(format!(
                    "piece on [{}, {}] has the wrong orientation",
                    dom.lo, dom.hi
                )));
            }
        }
        let at_t: Vec<f64> = match &init {
            InitialHomeo::Split { left, right } => vec![left.last_value(), right.first_value()],
            InitialHomeo::Core { core } => vec![core.last_value()],
        };
        if at_t.iter().any(|&v| (v - s).abs() > ytol) {
            return Err(Error::Init(format!("initial pieces must send t to s = {s}")));
        }

        // Images of the pieces must sit on the side of s they feed into.
        let Interval { lo: c, hi: d } = g.domain();
        match &init {
            InitialHomeo::Split { left, right } => {
                let (lt, rt) = if inc { ((c, s), (s, d)) } else { ((s, d), (c, s)) };
                for (name, piece, (lo, hi)) in [("left", left, lt), ("right", right, rt)] {
                    let (u, v) = (piece.first_value(), piece.last_value());
                    if u.min(v) < lo - ytol || u.max(v) > hi + ytol {
                        return Err(Error::ConstructionDomain(format!(
                            "{name} piece image [{}, {}] leaves [{lo}, {hi}]",
                            u.min(v),
                            u.max(v)
                        )));
                    }
                }
            }
            InitialHomeo::Core { core } => {
                // ψ₀ on f_r(gap) = [f_e²(t), f(t+0)] must land where the gap
                // branch of g can be inverted.
                let gap_branch = if inc { g.right() } else { g.left() };
                let (img_lo, img_hi) = gap_branch.image();
                let (_, fr) = f.one_sided_limits();
                for x in [core.lo(), fr] {
                    let y = core.eval(x);
                    if y < img_lo - ytol || y > img_hi + ytol {
                        return Err(Error::ConstructionDomain(format!(
                            "ψ₀({x}) = {y} is outside the image [{img_lo}, {img_hi}] of g's {} branch",
                            if inc { "right" } else { "left" }
                        )));
                    }
                }
            }
        }

        Ok(Conjugacy {
            f: f.clone(),
            g: g.clone(),
            orientation,
            init,
            pins,
            f_orbit,
            g_orbit,
            params,
        })
    }

    fn check_init_pins(&self) -> Result<()> {
        let tol = PIN_TOL * scale(&self.g);
        for (i, required) in required_knots(&self.f, &self.g, &self.pins).into_iter().enumerate() {
            let piece = self.init.pieces()[i];
            for (x, y) in required {
                let v = piece.eval(x);
                if (v - y).abs() > tol {
                    return Err(Error::Init(format!(
                        "initial homeomorphism gives {v} at x = {x}, pinned value is {y}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn f(&self) -> &JumpMap {
        &self.f
    }

    pub fn g(&self) -> &JumpMap {
        &self.g
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn init(&self) -> &InitialHomeo {
        &self.init
    }

    pub fn pins(&self) -> &PinnedPoints {
        &self.pins
    }

    pub fn params(&self) -> EvalParams {
        self.params
    }

    pub fn f_orbit(&self) -> &OrbitPartition {
        &self.f_orbit
    }

    pub fn g_orbit(&self) -> &OrbitPartition {
        &self.g_orbit
    }

    pub fn domain(&self) -> Interval {
        self.f.domain()
    }

    pub fn codomain(&self) -> Interval {
        self.g.domain()
    }

    /// `(φ(a), φ(b))`.
    pub fn endpoint_images(&self) -> (f64, f64) {
        let Interval { lo: c, hi: d } = self.g.domain();
        match self.orientation {
            Orientation::Increasing => (c, d),
            Orientation::Decreasing => (d, c),
        }
    }

    fn g_side(&self, f_side: Side) -> Side {
        match self.orientation {
            Orientation::Increasing => f_side,
            Orientation::Decreasing => f_side.opposite(),
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if x == self.f.t() {
            return Ok(self.g.t());
        }
        match self.f_orbit.locate(x)? {
            Cell::Endpoint(End::Lo) => Ok(self.endpoint_images().0),
            Cell::Endpoint(End::Hi) => Ok(self.endpoint_images().1),
            Cell::Left(n) => Ok(self.eval_cell(Side::Left, n, x)),
            Cell::Right(n) => Ok(self.eval_cell(Side::Right, n, x)),
            Cell::Gap => Ok(self.eval_gap(x)),
        }
    }

    fn eval_cell(&self, side: Side, n: usize, x: f64) -> f64 {
        let tol = self.params.inv_tol;
        match &self.init {
            InitialHomeo::Split { left, right } => {
                let (fb, piece) = match side {
                    Side::Left => (self.f.left(), left),
                    Side::Right => (self.f.right(), right),
                };
                let mut z = x;
                for _ in 0..n {
                    z = fb.inverse_unchecked(z, tol);
                }
                // Rounding in the pull-back may step just outside the piece;
                // φ is continuous there, so clamping is harmless.
                let mut y = piece.eval(z);
                let gb = self.g.branch(self.g_side(side));
                for _ in 0..n {
                    y = gb.eval(y);
                }
                y
            }
            InitialHomeo::Core { core } => {
                let mut z = x;
                for k in (1..=n).rev() {
                    z = if k % 2 == 1 {
                        self.f.left().inverse_unchecked(z, tol)
                    } else {
                        self.f.right().inverse_unchecked(z, tol)
                    };
                }
                let mut y = core.eval(z);
                for j in 0..n {
                    let f_side = if j % 2 == 0 { Side::Left } else { Side::Right };
                    y = self.g.branch(self.g_side(f_side)).eval(y);
                }
                y
            }
        }
    }

    fn eval_gap(&self, x: f64) -> f64 {
        let InitialHomeo::Core { core } = &self.init else {
            unreachable!("only family B partitions have a gap cell")
        };
        let y = core.eval(self.f.right().eval(x));
        self.g
            .branch(self.g_side(Side::Right))
            .inverse_unchecked(y, self.params.inv_tol)
    }

    /// `x` with `|φ(x) − y| ≤ tol`, by bisection on `[a, b]`; with `tol = 0`
    /// the bracket is halved until it collapses.
    pub fn evaluate_inverse(&self, y: f64, tol: f64) -> Result<f64> {
        let Interval { lo: c, hi: d } = self.g.domain();
        if !(y >= c && y <= d) {
            return Err(Error::Domain { x: y, lo: c, hi: d });
        }
        let Interval { lo: a, hi: b } = self.f.domain();
        let (pa, pb) = self.endpoint_images();
        if y == self.g.t() {
            return Ok(self.f.t());
        }
        if y == pa {
            return Ok(a);
        }
        if y == pb {
            return Ok(b);
        }
        let inc = self.orientation == Orientation::Increasing;
        let (mut lo, mut hi) = (a, b);
        let (mut best, mut best_err) = (a, f64::INFINITY);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.evaluate(mid)?;
            let err = (v - y).abs();
            if err < best_err {
                best = mid;
                best_err = err;
            }
            if err <= tol && tol > 0.0 {
                return Ok(mid);
            }
            if (v < y) == inc {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        for x in [lo, hi] {
            let err = (self.evaluate(x)? - y).abs();
            if err < best_err {
                best = x;
                best_err = err;
            }
        }
        Ok(best)
    }
}
