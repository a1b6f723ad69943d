//! JSON descriptions of maps and built conjugacies.
//!
//! A map file looks like
//!
//! ```json
//! { "domain": [0, 1], "t": 0.25, "family": "A", "value_at_t": [3, 16],
//!   "left":  { "kind": "affine", "coeffs": [0, 0.5] },
//!   "right": { "kind": "poly",   "coeffs": [0.5, 0.5] } }
//! ```
//!
//! Every number may be a decimal or an exact `[numerator, denominator]` pair.
//! Coefficients are in ascending degree.

use serde::{Deserialize, Serialize};

use crate::builder::{build_conjugacy, Conjugacy, EvalParams, InitialHomeo};
use crate::error::{Error, Result};
use crate::interval_map::{Branch, BranchKind, Family, Interval, JumpMap, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Decimal(f64),
    Ratio(i64, i64),
}

impl Scalar {
    pub fn value(&self) -> Result<f64> {
        let v = match *self {
            Scalar::Decimal(v) => v,
            Scalar::Ratio(_, 0) => return Err(Error::Spec("zero denominator".into())),
            Scalar::Ratio(p, q) => p as f64 / q as f64,
        };
        if !v.is_finite() {
            return Err(Error::Spec(format!("non-finite number {v}")));
        }
        Ok(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Decimal(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSpecKind {
    Affine,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub kind: BranchSpecKind,
    pub coeffs: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub domain: [Scalar; 2],
    pub t: Scalar,
    pub family: Family,
    pub value_at_t: Scalar,
    pub left: BranchSpec,
    pub right: BranchSpec,
}

impl BranchSpec {
    fn to_branch(&self, domain: Interval) -> Result<Branch> {
        let coeffs = self
            .coeffs
            .iter()
            .map(Scalar::value)
            .collect::<Result<Vec<f64>>>()?;
        match self.kind {
            BranchSpecKind::Affine => {
                if coeffs.len() != 2 {
                    return Err(Error::Spec(format!(
                        "affine branch needs 2 coefficients, got {}",
                        coeffs.len()
                    )));
                }
                Branch::affine(coeffs[0], coeffs[1], domain)
            }
            BranchSpecKind::Poly => {
                if coeffs.is_empty() {
                    return Err(Error::Spec("polynomial branch without coefficients".into()));
                }
                Branch::polynomial(coeffs, domain)
            }
        }
    }

    fn from_branch(b: &Branch) -> Result<Self> {
        let kind = match b.kind() {
            BranchKind::Affine => BranchSpecKind::Affine,
            BranchKind::Polynomial => BranchSpecKind::Poly,
            BranchKind::Callable => {
                return Err(Error::Spec("callable branches have no file form".into()))
            }
        };
        let coeffs = b
            .coefficients()
            .expect("affine and polynomial branches have coefficients")
            .iter()
            .map(|&c| Scalar::Decimal(c))
            .collect();
        Ok(BranchSpec { kind, coeffs })
    }
}

impl MapSpec {
    pub fn to_map(&self) -> Result<JumpMap> {
        let (a, b) = (self.domain[0].value()?, self.domain[1].value()?);
        if a >= b {
            return Err(Error::Spec(format!("domain [{a}, {b}] is out of order")));
        }
        let t = self.t.value()?;
        if !(a < t && t < b) {
            return Err(Error::Spec(format!("jump t = {t} outside ({a}, {b})")));
        }
        let left = self.left.to_branch(Interval { lo: a, hi: t })?;
        let right = self.right.to_branch(Interval { lo: t, hi: b })?;
        JumpMap::new(
            Interval::new(a, b)?,
            t,
            left,
            right,
            self.value_at_t.value()?,
            self.family,
        )
    }

    pub fn from_map(m: &JumpMap) -> Result<Self> {
        let d = m.domain();
        Ok(MapSpec {
            domain: [d.lo.into(), d.hi.into()],
            t: m.t().into(),
            family: m.family(),
            value_at_t: m.value_at_t().into(),
            left: BranchSpec::from_branch(m.left())?,
            right: BranchSpec::from_branch(m.right())?,
        })
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map specs always serialize")
    }
}

/// Parses a map file straight into a [`JumpMap`].
pub fn parse_map(json: &str) -> Result<JumpMap> {
    MapSpec::parse(json)?.to_map()
}

/// Everything needed to rebuild a conjugacy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyHandle {
    pub f: MapSpec,
    pub g: MapSpec,
    pub orientation: Orientation,
    pub init: InitialHomeo,
    pub params: EvalParams,
}

impl ConjugacyHandle {
    pub fn from_conjugacy(phi: &Conjugacy) -> Result<Self> {
        Ok(ConjugacyHandle {
            f: MapSpec::from_map(phi.f())?,
            g: MapSpec::from_map(phi.g())?,
            orientation: phi.orientation(),
            init: phi.init().clone(),
            params: phi.params(),
        })
    }

    pub fn build(&self) -> Result<Conjugacy> {
        let phi = build_conjugacy(
            &self.f.to_map()?,
            &self.g.to_map()?,
            Some(self.init.clone()),
            self.params,
        )?;
        if phi.orientation() != self.orientation {
            return Err(Error::Spec(format!(
                "handle says {:?}, the pair forces {:?}",
                self.orientation,
                phi.orientation()
            )));
        }
        Ok(phi)
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Spec(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1_F: &str = r#"{
        "domain": [0, 1], "t": [1, 4], "family": "A", "value_at_t": [3, 16],
        "left": {"kind": "affine", "coeffs": [0, [1, 2]]},
        "right": {"kind": "affine", "coeffs": [[1, 2], 0.5]}
    }"#;

    #[test]
    fn rationals_and_decimals_mix() {
        let m = parse_map(EX1_F).unwrap();
        assert_eq!(m.t(), 0.25);
        assert_eq!(m.value_at_t(), 0.1875);
        assert_eq!(m.right().eval(1.0), 1.0);
    }

    #[test]
    fn round_trip_through_json() {
        let m = parse_map(EX1_F).unwrap();
        let spec = MapSpec::from_map(&m).unwrap();
        let again = parse_map(&spec.to_json()).unwrap();
        assert_eq!(again.t(), m.t());
        assert_eq!(again.left().coefficients(), m.left().coefficients());
    }

    #[test]
    fn rejects_bad_input() {
        let swapped = EX1_F.replace("[0, 1]", "[1, 0]");
        assert!(matches!(parse_map(&swapped), Err(Error::Spec(_))));
        let nan = EX1_F.replace("[3, 16]", "NaN");
        assert!(matches!(parse_map(&nan), Err(Error::Spec(_))));
        let zero_den = EX1_F.replace("[3, 16]", "[3, 0]");
        assert!(matches!(parse_map(&zero_den), Err(Error::Spec(_))));
        let three = EX1_F.replace("[0, [1, 2]]", "[0, 0.5, 1]");
        assert!(matches!(parse_map(&three), Err(Error::Spec(_))));
        let huge = EX1_F.replace("[3, 16]", "1e999");
        assert!(parse_map(&huge).is_err());
    }
}
