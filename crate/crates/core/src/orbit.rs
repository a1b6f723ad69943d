//! Boundary orbits of the jump point and the fundamental-domain partitions
//! they induce.
//!
//! Family A iterates the two one-sided branch closures separately:
//! `f_lⁿ(t) ↓ a` and `f_rⁿ(t) ↑ b`, giving cells
//! `Iₙ = (f_lⁿ⁺¹(t), f_lⁿ(t)]` and `Jₙ = [f_rⁿ(t), f_rⁿ⁺¹(t))`.
//!
//! Family B iterates `f_e` (the map with `f_e(t) = f(t−0)`), whose orbit of
//! `t` alternates sides: even iterates decrease to `a`, odd ones increase to
//! `b`. Cells are the closed intervals `[f_e²ᵏ⁺²(t), f_e²ᵏ(t)]`, the gap
//! `(t, f_e(t))` and `[f_e²ᵏ⁺¹(t), f_e²ᵏ⁺³(t)]`; a point shared by two cells
//! belongs to the one with smaller `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_map::{Family, Interval, JumpMap, Side};

pub const DEFAULT_N_MAX: usize = 200;
pub const DEFAULT_ENDPOINT_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrbitPoints {
    /// Family A: `f_lⁿ(t)` and `f_rⁿ(t)`, both starting at `t`.
    Split { left: Vec<f64>, right: Vec<f64> },
    /// Family B: `f_eⁿ(t)` starting at `t`.
    Alternating { points: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Lo,
    Hi,
}

/// Partition cell containing a point. The index is the number of branch
/// inversions that carry the cell onto the fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Endpoint(End),
    Left(usize),
    Right(usize),
    /// Family B only: `(t, f_e(t))`.
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPartition {
    pub family: Family,
    pub domain: Interval,
    pub t: f64,
    pub points: OrbitPoints,
    pub depth: usize,
    pub endpoint_eps: f64,
}

pub fn boundary_orbit(m: &JumpMap, n_max: usize, endpoint_eps: f64) -> Result<OrbitPartition> {
    match m.family() {
        Family::IncreasingA => boundary_orbit_a(m, n_max, endpoint_eps),
        Family::DecreasingB => boundary_orbit_b(m, n_max, endpoint_eps),
    }
}

pub fn boundary_orbit_a(m: &JumpMap, n_max: usize, endpoint_eps: f64) -> Result<OrbitPartition> {
    if m.family() != Family::IncreasingA {
        return Err(Error::Orbit("family A orbit requested for a family B map".into()));
    }
    let Interval { lo: a, hi: b } = m.domain();
    let t = m.t();

    let mut left = vec![t];
    while left.len() <= n_max && left[left.len() - 1] - a > endpoint_eps {
        let prev = left[left.len() - 1];
        let next = m.left().eval(prev);
        if !(next < prev && next >= a - endpoint_eps) {
            return Err(Error::Orbit(format!(
                "f_l^{}(t) = {next} does not decrease from {prev} toward {a}",
                left.len()
            )));
        }
        left.push(next);
    }

    let mut right = vec![t];
    while right.len() <= n_max && b - right[right.len() - 1] > endpoint_eps {
        let prev = right[right.len() - 1];
        let next = m.right().eval(prev);
        if !(next > prev && next <= b + endpoint_eps) {
            return Err(Error::Orbit(format!(
                "f_r^{}(t) = {next} does not increase from {prev} toward {b}",
                right.len()
            )));
        }
        right.push(next);
    }

    Ok(OrbitPartition {
        family: Family::IncreasingA,
        domain: m.domain(),
        t,
        points: OrbitPoints::Split { left, right },
        depth: n_max,
        endpoint_eps,
    })
}

pub fn boundary_orbit_b(m: &JumpMap, n_max: usize, endpoint_eps: f64) -> Result<OrbitPartition> {
    if m.family() != Family::DecreasingB {
        return Err(Error::Orbit("family B orbit requested for a family A map".into()));
    }
    let Interval { lo: a, hi: b } = m.domain();
    let t = m.t();
    let near_limit = |n: usize, x: f64| {
        if n.is_multiple_of(2) {
            x - a <= endpoint_eps
        } else {
            b - x <= endpoint_eps
        }
    };

    let mut points = vec![t];
    while points.len() <= n_max {
        let n = points.len();
        if n >= 2 && near_limit(n - 1, points[n - 1]) && near_limit(n - 2, points[n - 2]) {
            break;
        }
        let prev = points[n - 1];
        // f_e: the left closure at t, f elsewhere.
        let next = if prev <= t {
            m.left().eval(prev)
        } else {
            m.right().eval(prev)
        };
        let ok = if n % 2 == 1 {
            // odd iterate: right of t and above the previous odd one
            next > t && (n < 3 || next > points[n - 2]) && next <= b + endpoint_eps
        } else {
            next < t && next < points[n - 2] && next >= a - endpoint_eps
        };
        if !ok {
            return Err(Error::Orbit(format!(
                "f_e^{n}(t) = {next} breaks the alternating convergence to the 2-cycle {{{a}, {b}}}"
            )));
        }
        points.push(next);
    }

    Ok(OrbitPartition {
        family: Family::DecreasingB,
        domain: m.domain(),
        t,
        points: OrbitPoints::Alternating { points },
        depth: n_max,
        endpoint_eps,
    })
}

impl OrbitPartition {
    /// `f_l(t)` / `f_r(t)` for family A, `f_e(t)` / `f_e²(t)` for family B,
    /// when computed.
    pub fn point(&self, side: Side, n: usize) -> Option<f64> {
        match &self.points {
            OrbitPoints::Split { left, right } => match side {
                Side::Left => left.get(n).copied(),
                Side::Right => right.get(n).copied(),
            },
            OrbitPoints::Alternating { points } => points.get(n).copied(),
        }
    }

    /// `(n, point, side)` rows for dumps.
    pub fn rows(&self) -> Vec<(usize, f64, Side)> {
        match &self.points {
            OrbitPoints::Split { left, right } => left
                .iter()
                .enumerate()
                .map(|(n, &x)| (n, x, Side::Left))
                .chain(right.iter().enumerate().map(|(n, &x)| (n, x, Side::Right)))
                .collect(),
            OrbitPoints::Alternating { points } => points
                .iter()
                .enumerate()
                .map(|(n, &x)| (n, x, if n % 2 == 0 { Side::Left } else { Side::Right }))
                .collect(),
        }
    }

    pub fn locate(&self, x: f64) -> Result<Cell> {
        let Interval { lo: a, hi: b } = self.domain;
        if !self.domain.contains(x) {
            return Err(Error::Domain { x, lo: a, hi: b });
        }
        if x - a <= self.endpoint_eps {
            return Ok(Cell::Endpoint(End::Lo));
        }
        if b - x <= self.endpoint_eps {
            return Ok(Cell::Endpoint(End::Hi));
        }
        if x == self.t {
            return Ok(Cell::Left(0));
        }
        let deep = || Error::DepthExceeded {
            x,
            depth: self.depth,
        };
        match &self.points {
            OrbitPoints::Split { left, right } => {
                if x < self.t {
                    // p_{n+1} < x <= p_n
                    let n = left.partition_point(|&p| p >= x) - 1;
                    if n + 1 < left.len() {
                        Ok(Cell::Left(n))
                    } else {
                        Err(deep())
                    }
                } else {
                    // q_n <= x < q_{n+1}
                    let n = right.partition_point(|&q| q <= x) - 1;
                    if n + 1 < right.len() {
                        Ok(Cell::Right(n))
                    } else {
                        Err(deep())
                    }
                }
            }
            OrbitPoints::Alternating { points } => {
                let evens: Vec<f64> = points.iter().step_by(2).copied().collect();
                let odds: Vec<f64> = points.iter().skip(1).step_by(2).copied().collect();
                if x < self.t {
                    // smallest k with e_{2k+2} <= x
                    let k = evens[1..].partition_point(|&e| e > x);
                    if k + 1 < evens.len() {
                        Ok(Cell::Left(2 * k))
                    } else {
                        Err(deep())
                    }
                } else {
                    match odds.first() {
                        Some(&e1) if x < e1 => Ok(Cell::Gap),
                        Some(_) => {
                            // smallest k with x <= e_{2k+3}
                            let k = odds[1..].partition_point(|&o| o < x);
                            if k + 1 < odds.len() {
                                Ok(Cell::Right(2 * k + 1))
                            } else {
                                Err(deep())
                            }
                        }
                        None => Err(deep()),
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1_f() -> JumpMap {
        JumpMap::affine(0.0, 1.0, 0.25, (0.0, 0.5), (0.5, 0.5), 3.0 / 16.0, Family::IncreasingA)
            .unwrap()
    }

    fn ex2_f() -> JumpMap {
        let m = -23.0 / 40.0;
        JumpMap::affine(0.0, 1.0, 0.5, (1.0, m), (23.0 / 40.0, m), 17.0 / 40.0, Family::DecreasingB)
            .unwrap()
    }

    fn ex2_g() -> JumpMap {
        JumpMap::affine(0.0, 1.0, 0.25, (1.0, -0.125), (0.125, -0.125), 53.0 / 272.0, Family::DecreasingB)
            .unwrap()
    }

    #[test]
    fn increasing_orbits_are_dyadic() {
        let p = boundary_orbit_a(&ex1_f(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        let OrbitPoints::Split { left, right } = &p.points else {
            panic!()
        };
        for (n, &x) in left.iter().enumerate() {
            assert_eq!(x, 2f64.powi(-(n as i32) - 2));
        }
        for (n, &x) in right.iter().enumerate().take(40) {
            assert_eq!(x, 1.0 - 3.0 * 2f64.powi(-(n as i32) - 2));
        }
        assert!(left.last().unwrap() <= &DEFAULT_ENDPOINT_EPS);
        assert!(1.0 - right.last().unwrap() <= DEFAULT_ENDPOINT_EPS);
    }

    #[test]
    fn zero_depth_keeps_only_t() {
        let p = boundary_orbit_a(&ex1_f(), 0, DEFAULT_ENDPOINT_EPS).unwrap();
        assert_eq!(
            p.points,
            OrbitPoints::Split {
                left: vec![0.25],
                right: vec![0.25]
            }
        );
        assert_eq!(p.locate(0.25).unwrap(), Cell::Left(0));
        assert!(matches!(p.locate(0.2), Err(Error::DepthExceeded { .. })));
        assert_eq!(p.locate(0.0).unwrap(), Cell::Endpoint(End::Lo));
    }

    #[test]
    fn decreasing_orbits() {
        let p = boundary_orbit_b(&ex2_f(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        let OrbitPoints::Alternating { points } = &p.points else {
            panic!()
        };
        assert_eq!(points[0], 0.5);
        assert!((points[1] - 57.0 / 80.0).abs() < 1e-15);
        assert!((points[2] - 529.0 / 3200.0).abs() < 1e-15);

        let q = boundary_orbit_b(&ex2_g(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        assert_eq!(q.point(Side::Left, 1), Some(31.0 / 32.0));
        assert_eq!(q.point(Side::Left, 2), Some(1.0 / 256.0));

        let short = boundary_orbit_b(&ex2_f(), 1, DEFAULT_ENDPOINT_EPS).unwrap();
        assert_eq!(
            short.points,
            OrbitPoints::Alternating {
                points: vec![0.5, 1.0 - 23.0 / 80.0]
            }
        );
    }

    #[test]
    fn family_mismatch_is_an_orbit_error() {
        assert!(matches!(
            boundary_orbit_b(&ex1_f(), 10, 1e-13),
            Err(Error::Orbit(_))
        ));
        assert!(matches!(
            boundary_orbit_a(&ex2_f(), 10, 1e-13),
            Err(Error::Orbit(_))
        ));
    }

    #[test]
    fn non_member_map_fails_to_iterate() {
        // f(x) > x on the left: the left orbit climbs instead of decreasing
        let bad = JumpMap::affine(0.0, 1.0, 0.5, (0.1, 0.9), (0.5, 0.5), 0.3, Family::IncreasingA)
            .unwrap();
        assert!(matches!(boundary_orbit_a(&bad, 10, 1e-13), Err(Error::Orbit(_))));
    }

    #[test]
    fn locate_examples() {
        let p = boundary_orbit_a(&ex1_f(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        assert_eq!(p.locate(3.0 / 16.0).unwrap(), Cell::Left(0));
        assert_eq!(p.locate(0.0).unwrap(), Cell::Endpoint(End::Lo));
        assert_eq!(p.locate(1.0).unwrap(), Cell::Endpoint(End::Hi));
        assert_eq!(p.locate(0.125).unwrap(), Cell::Left(1));
        assert_eq!(p.locate(0.625).unwrap(), Cell::Right(1));
        assert_eq!(p.locate(0.5).unwrap(), Cell::Right(0));
        assert!(matches!(p.locate(1.5), Err(Error::Domain { .. })));

        let q = boundary_orbit_b(&ex2_f(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        assert_eq!(q.locate(0.6).unwrap(), Cell::Gap);
        assert_eq!(q.locate(0.3).unwrap(), Cell::Left(0));
        let e = |n| q.point(Side::Left, n).unwrap();
        // shared endpoints go to the smaller k
        assert_eq!(q.locate(e(2)).unwrap(), Cell::Left(0));
        assert_eq!(q.locate(e(4)).unwrap(), Cell::Left(2));
        assert_eq!(q.locate(e(1)).unwrap(), Cell::Right(1));
        assert_eq!(q.locate(e(3)).unwrap(), Cell::Right(1));
        assert_eq!(q.locate(0.5 * (e(3) + e(5))).unwrap(), Cell::Right(3));
    }

    #[test]
    fn orbit_points_are_cell_boundaries() {
        let p = boundary_orbit_a(&ex1_f(), DEFAULT_N_MAX, DEFAULT_ENDPOINT_EPS).unwrap();
        for n in 0..20 {
            assert_eq!(p.locate(p.point(Side::Left, n).unwrap()).unwrap(), Cell::Left(n));
            if n > 0 {
                assert_eq!(p.locate(p.point(Side::Right, n).unwrap()).unwrap(), Cell::Right(n));
            }
        }
    }
}
