//! Data behind the conjugacy plots: the curve on a grid and the forced
//! graph points.

use serde::{Deserialize, Serialize};

use crate::builder::Conjugacy;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub phi_x: f64,
}

/// One forced point. `n` is the iterate index for points `fⁿ(t)`, or `-1`
/// for pins that are not on the forward orbit of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinRow {
    pub n: i64,
    pub x: f64,
    pub phi_x: f64,
    pub expected: f64,
}

pub fn curve(phi: &Conjugacy, grid_n: usize) -> Result<Vec<CurvePoint>> {
    let d = phi.domain();
    (0..grid_n)
        .map(|i| {
            let x = if i + 1 == grid_n {
                d.hi
            } else {
                d.lo + d.width() * (i as f64 / (grid_n.max(2) - 1) as f64)
            };
            Ok(CurvePoint {
                x,
                phi_x: phi.evaluate(x)?,
            })
        })
        .collect()
}

/// `fⁿ(t) ↦ gⁿ(s)` for `n ≤ depth`, followed by the remaining pins.
pub fn pin_rows(phi: &Conjugacy, depth: usize) -> Result<Vec<PinRow>> {
    let (f, g) = (phi.f(), phi.g());
    let mut rows = Vec::new();
    let (mut x, mut y) = (f.t(), g.t());
    for n in 0..=depth {
        rows.push(PinRow {
            n: n as i64,
            x,
            phi_x: phi.evaluate(x)?,
            expected: y,
        });
        x = f.eval(x)?;
        y = g.eval(y)?;
    }
    for &(x, y) in &phi.pins().points {
        if !rows.iter().any(|r| r.x == x) {
            rows.push(PinRow {
                n: -1,
                x,
                phi_x: phi.evaluate(x)?,
                expected: y,
            });
        }
    }
    Ok(rows)
}
