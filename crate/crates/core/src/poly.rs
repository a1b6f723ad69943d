//! Small helpers for polynomials stored as ascending-degree coefficients.

/// Horner evaluation.
pub(crate) fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    &coeffs[..n]
}

/// Real roots of the polynomial inside `[lo, hi]`, sorted and deduplicated.
///
/// The interval is split at the critical points (found recursively from the
/// derivative), so each piece is monotone and holds at most one root, which is
/// then isolated by bisection. Roots of even multiplicity show up as critical
/// points where the value is zero.
pub(crate) fn real_roots(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = trimmed(coeffs);
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p[0] / p[1];
            if r >= lo && r <= hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut breaks = vec![lo];
            breaks.extend(real_roots(&derivative(p), lo, hi));
            breaks.push(hi);
            let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let zero_tol = 64.0 * f64::EPSILON * scale.max(1.0);
            let mut roots: Vec<f64> = Vec::new();
            for w in breaks.windows(2) {
                let (u, v) = (w[0], w[1]);
                let (pu, pv) = (eval(p, u), eval(p, v));
                if pu.abs() <= zero_tol {
                    roots.push(u);
                } else if pv.abs() > zero_tol && (pu < 0.0) != (pv < 0.0) {
                    roots.push(bisect_root(p, u, v, pu));
                }
            }
            if eval(p, hi).abs() <= zero_tol {
                roots.push(hi);
            }
            roots.sort_by(f64::total_cmp);
            roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
            roots
        }
    }
}

fn bisect_root(p: &[f64], mut u: f64, mut v: f64, pu: f64) -> f64 {
    let neg_at_u = pu < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (u + v);
        if mid <= u || mid >= v {
            break;
        }
        let pm = eval(p, mid);
        if pm == 0.0 {
            return mid;
        }
        if (pm < 0.0) == neg_at_u {
            u = mid;
        } else {
            v = mid;
        }
    }
    0.5 * (u + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_expansion() {
        // 1 + 2x + 3x^2 at x = 2
        assert_eq!(eval(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(eval(&[], 2.0), 0.0);
    }

    #[test]
    fn derivative_power_rule() {
        assert_eq!(derivative(&[5.0, 0.0, 1.0]), vec![0.0, 2.0]);
        assert!(derivative(&[5.0]).is_empty());
    }

    #[test]
    fn roots_of_cubic() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let c = [-0.09, 0.73, -1.6, 1.0];
        let r = real_roots(&c, 0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(real_roots(&c, 0.3, 0.4), Vec::<f64>::new());
    }

    #[test]
    fn double_root_is_found() {
        // (x - 0.5)^2
        let r = real_roots(&[0.25, -1.0, 1.0], 0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-12);
    }
}
