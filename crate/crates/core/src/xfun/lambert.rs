use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;
const BRANCH_CLAMP: f64 = 1e-15;
const MAX_STEPS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Principal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WResult {
    pub value: f64,
    /// `|W e^W - x|` at the returned value.
    pub residual: f64,
    pub branch: Branch,
}

/// Principal branch `W0` of the Lambert W function on `[-1/e, inf)`.
///
/// Inputs within `1e-15` below the branch point are clamped onto it.
pub fn lambert_w0(x: f64) -> Result<WResult> {
    if x.is_nan() || x < BRANCH_POINT - BRANCH_CLAMP {
        return Err(Error::Domain(format!("lambert_w0 needs x >= -1/e, got {x}")));
    }
    if x == f64::INFINITY {
        return Ok(WResult { value: f64::INFINITY, residual: 0.0, branch: Branch::Principal });
    }
    if x <= BRANCH_POINT {
        return Ok(WResult { value: -1.0, residual: (BRANCH_POINT - x).abs(), branch: Branch::Principal });
    }
    if x == 0.0 {
        return Ok(WResult { value: 0.0, residual: 0.0, branch: Branch::Principal });
    }

    let tol = 1e-14 * x.abs().max(1.0);
    let mut w = initial_guess(x);
    let mut residual = (w * w.exp() - x).abs();
    for _ in 0..MAX_STEPS {
        if residual <= tol {
            break;
        }
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            w = -1.0 + 1e-300;
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let next = (w - f / denom).max(-1.0);
        let next_residual = (next * next.exp() - x).abs();
        if next == w || (next_residual >= residual && residual <= 1e-12 * x.abs().max(1.0)) {
            break;
        }
        w = next;
        residual = next_residual;
    }
    Ok(WResult { value: w, residual: (w * w.exp() - x).abs(), branch: Branch::Principal })
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.32 {
        // series in p = sqrt(2(ex + 1)) about the branch point
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap().value, 0.0);
        assert_eq!(lambert_w0(-1.0 / E).unwrap().value, -1.0);
        assert!((lambert_w0(E).unwrap().value - 1.0).abs() < 1e-15);
        // omega constant
        assert!((lambert_w0(1.0).unwrap().value - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn below_branch_point_is_rejected() {
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        assert_eq!(lambert_w0(-1.0 / E - 5e-16).unwrap().value, -1.0);
    }

    #[test]
    fn near_branch_point() {
        let x = -1.0 / E + 1e-10;
        let r = lambert_w0(x).unwrap();
        assert!(r.value > -1.0 && r.value < -0.99);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn large_arguments() {
        for &x in &[1e3, 1e10, 1e100, 1e300] {
            let r = lambert_w0(x).unwrap();
            assert!(r.residual <= 1e-12 * x, "x={x} residual={}", r.residual);
        }
    }
}
