//! Special functions and extended-range arithmetic.

mod lambert;
mod levelindex;

pub use lambert::{lambert_w0, Branch, WResult};
pub use levelindex::{exp_of, LevelIndex, XReal, DEFAULT_MAX_LEVEL};

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `e^{-e}`, the lower end of the deterministic convergence interval.
pub const E_NEG_E: f64 = 0.065_988_035_845_312_53;
/// `e^{1/e}`, the upper end of the deterministic convergence interval.
pub const E_INV_E: f64 = 1.444_667_861_009_766_2;

/// `base^exponent` with the exponent in level-index form.
pub fn li_pow(base: f64, exponent: LevelIndex) -> LevelIndex {
    assert!(base >= 0.0, "li_pow needs a nonnegative base, got {base}");
    if base == 1.0 {
        return LevelIndex::ONE;
    }
    if base == 0.0 {
        return if exponent.is_zero() { LevelIndex::ONE } else { LevelIndex::ZERO };
    }
    if exponent.is_overflow() {
        return if base > 1.0 { LevelIndex::OVERFLOW } else { LevelIndex::ZERO };
    }
    if exponent.is_finite_f64() {
        let t = exponent.to_f64();
        let v = base.powf(t);
        if v.is_finite() {
            return LevelIndex::from_f64(v);
        }
        let y = t * base.ln();
        if y.is_finite() {
            return exp_of(y);
        }
    }
    if base < 1.0 {
        // exponent beyond double range: the power underflows
        return LevelIndex::ZERO;
    }
    exponent.mul(&LevelIndex::from_f64(base.ln())).exp()
}

/// `c⋆n`: the tower of `n` copies of `c`, with `c⋆0 = 1`.
pub fn tetrate(c: f64, n: u64) -> LevelIndex {
    let mut t = LevelIndex::ONE;
    for _ in 0..n {
        if t.is_overflow() && c > 1.0 {
            break;
        }
        t = li_pow(c, t);
    }
    t
}

/// Smallest `n` with `e⋆n >= x`.
pub fn log_star(x: LevelIndex) -> u64 {
    let mut t = LevelIndex::ONE;
    let mut n = 0;
    while t < x {
        t = li_pow(E, t);
        n += 1;
    }
    n
}

/// `log★` of a double; 0 for every `x <= 1`. Panics on NaN.
pub fn log_star_f64(x: f64) -> u64 {
    if x <= 1.0 {
        return 0;
    }
    log_star(LevelIndex::from_f64(x))
}

/// The infinite tower value `C(x)`, the real solution of `C = x^C`.
pub fn tower_limit_c(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("tower_limit_c needs x in (0,1], got {x}")));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let l = -x.ln();
    Ok(lambert_w0(l)?.value / l)
}

/// The boundary function `G` separating convergence from oscillation.
pub fn g_boundary(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("g_boundary needs x in (0,1], got {x}")));
    }
    if x >= E_NEG_E {
        return Ok(x);
    }
    let w = lambert_w0(1.0 / x.ln())?.value;
    Ok((w * (-1.0 / w).exp()).exp())
}

/// `exp(1/W(1/ln x))`, the tangency point of `t -> x^(G(x)^t)`.
pub fn tangent_point(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < E_NEG_E) {
        return Err(Error::Domain(format!("tangent_point needs x in (0, e^-e), got {x}")));
    }
    let w = lambert_w0(1.0 / x.ln())?.value;
    Ok((1.0 / w).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((E_NEG_E - (-E).exp()).abs() < 1e-16);
        assert!((E_INV_E - (1.0 / E).exp()).abs() < 1e-15);
    }

    #[test]
    fn small_tetrations() {
        assert_eq!(tetrate(2.0, 3).to_f64(), 16.0);
        assert_eq!(tetrate(2.0, 4).to_f64(), 65536.0);
        assert_eq!(tetrate(1.3, 1).to_f64(), 1.3);
        assert_eq!(tetrate(7.0, 0), LevelIndex::ONE);
        let e3 = E.powf(E.powf(E));
        assert!((tetrate(E, 3).to_f64() - e3).abs() < 1e-9 * e3);
    }

    #[test]
    fn tetration_leaves_double_range() {
        let t = tetrate(2.0, 6);
        assert!(!t.is_finite_f64());
        assert!(t > tetrate(2.0, 5));
        assert!(tetrate(2.0, 200).is_overflow());
    }

    #[test]
    fn log_star_examples() {
        assert_eq!(log_star_f64(E), 1);
        assert_eq!(log_star_f64(0.5), 0);
        assert_eq!(log_star_f64(1.0), 0);
        assert_eq!(log_star_f64(1.0001), 1);
        for n in 0..=6 {
            assert_eq!(log_star(tetrate(E, n)), n);
        }
    }

    #[test]
    fn li_pow_edges() {
        assert_eq!(li_pow(2.0, LevelIndex::from_f64(10.0)).to_f64(), 1024.0);
        assert!(li_pow(0.5, LevelIndex::OVERFLOW).is_zero());
        assert!(li_pow(0.5, tetrate(3.0, 5)).is_zero());
        assert!(li_pow(2.0, LevelIndex::OVERFLOW).is_overflow());
        assert_eq!(li_pow(0.0, LevelIndex::ZERO), LevelIndex::ONE);
    }

    #[test]
    fn c_and_g_at_the_boundary() {
        assert!((tower_limit_c(E_NEG_E).unwrap() - 1.0 / E).abs() < 1e-9);
        assert!((g_boundary(E_NEG_E).unwrap() - E_NEG_E).abs() < 1e-7);
        assert_eq!(g_boundary(0.5).unwrap(), 0.5);
        let g = g_boundary(0.04).unwrap();
        assert!(g > 0.0 && g < 0.04);
        assert!(tower_limit_c(0.0).is_err());
        assert!(g_boundary(1.5).is_err());
    }
}
