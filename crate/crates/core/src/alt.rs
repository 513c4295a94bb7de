//! Alternating power towers `x^(y^(x^(y^…)))` and the fixed points of
//! `t -> x^(y^t)`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 1_000_000;
const GRID: usize = 10_000;
const ROOT_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-9;

/// Fixed points of `t -> x^(y^t)` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AltFixedPoints {
    pub at_o: f64,
    pub c_mid: Option<f64>,
    pub at_e: f64,
    pub iterations: usize,
    /// Largest `|x^(y^t) - t|` over the reported points.
    pub residual: f64,
    /// Set when a double root without sign change was found.
    pub tangency: bool,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [0,1], got {v}")))
    }
}

#[inline]
fn pow0(base: f64, t: f64) -> f64 {
    // powf already gives 0^0 = 1
    base.powf(t)
}

/// Alternating tower of height `n` whose lowest base is `x`; `at_0 = 1`.
pub fn at_n(x: f64, y: f64, n: u32) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    let mut t = 1.0;
    for k in (1..=n).rev() {
        let base = if k % 2 == 1 { x } else { y };
        t = pow0(base, t);
    }
    Ok(t)
}

#[inline]
fn two_step(x: f64, y: f64, t: f64) -> f64 {
    pow0(x, pow0(y, t))
}

/// Iterates `t -> x^(y^t)` from `start` until consecutive terms differ by
/// less than `tol`. Returns the last term and whether it stopped on `tol`.
fn iterate_to_limit(x: f64, y: f64, start: f64, tol: f64, cap: usize) -> (f64, bool) {
    let mut t = start;
    for _ in 0..cap {
        let next = two_step(x, y, t);
        if (next - t).abs() < tol {
            return (next, true);
        }
        t = next;
    }
    (t, false)
}

/// Limits of the even and odd subsequences of `at_n(x, y)`, as `(at_e, at_o)`.
pub fn at_limits(x: f64, y: f64, tol: f64) -> Result<(f64, f64)> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let (even, ok_e) = iterate_to_limit(x, y, 1.0, tol, MAX_ITER);
    let (odd, ok_o) = iterate_to_limit(x, y, x, tol, MAX_ITER);
    if !(ok_e && ok_o) {
        return Err(Error::Convergence(format!(
            "alternating tower ({x}, {y}) did not settle to {tol} within {MAX_ITER} steps"
        )));
    }
    Ok((even, odd))
}

/// `(x^(y^t) - t, (ln x)(ln y) x^(y^t) y^t - 1)`.
pub fn eqns_residual(x: f64, y: f64, t: f64) -> (f64, f64) {
    let yt = y.powf(t);
    let g = x.powf(yt);
    (g - t, x.ln() * y.ln() * g * yt - 1.0)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, iters: &mut usize) -> f64 {
    let mut flo = f(lo);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        *iters += 1;
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Extremum of `f` on `[lo, hi]` by ternary search; minimizes when `minimize`.
fn ternary<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, minimize: bool, iters: &mut usize) -> f64 {
    let key = |t: f64| if minimize { f(t) } else { -f(t) };
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        *iters += 1;
        if key(m1) < key(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// All fixed points of `t -> x^(y^t)` in `[0, 1]`.
pub fn fixed_point_triple(x: f64, y: f64) -> Result<AltFixedPoints> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0,1), got {x}")));
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain(format!("y must lie in (0,1], got {y}")));
    }
    let f = |t: f64| t - two_step(x, y, t);
    let h = 1.0 / GRID as f64;
    let vals: Vec<f64> = (0..=GRID).map(|i| f(i as f64 * h)).collect();
    let mut iters = 0;
    let mut roots: Vec<f64> = Vec::new();
    let mut tangency = false;

    for i in 0..GRID {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(i as f64 * h);
        } else if (a < 0.0) != (b < 0.0) && b != 0.0 {
            roots.push(bisect(&f, i as f64 * h, (i + 1) as f64 * h, &mut iters));
        }
    }
    if vals[GRID] == 0.0 {
        roots.push(1.0);
    }

    // Local minima of |f| that the sign scan cannot see.
    for i in 1..GRID {
        let (a, m, b) = (vals[i - 1], vals[i], vals[i + 1]);
        let same_sign = (a < 0.0) == (m < 0.0) && (m < 0.0) == (b < 0.0);
        if !(same_sign && m.abs() <= a.abs() && m.abs() <= b.abs() && m != 0.0) {
            continue;
        }
        let lo = (i - 1) as f64 * h;
        let hi = (i + 1) as f64 * h;
        let positive = m > 0.0;
        let t_ext = ternary(&f, lo, hi, positive, &mut iters);
        let f_ext = f(t_ext);
        if (f_ext > 0.0) != positive && f_ext != 0.0 {
            roots.push(bisect(&f, lo, t_ext, &mut iters));
            roots.push(bisect(&f, t_ext, hi, &mut iters));
        } else if f_ext.abs() < TANGENT_TOL {
            roots.push(t_ext);
            tangency = true;
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    if roots.is_empty() {
        return Err(Error::Convergence(format!("no fixed point of t -> {x}^({y}^t) found")));
    }
    let residual = roots.iter().map(|&t| f(t).abs()).fold(0.0, f64::max);
    let c_mid = if roots.len() == 3 { Some(roots[1]) } else { None };
    Ok(AltFixedPoints {
        at_o: roots[0],
        c_mid,
        at_e: *roots.last().unwrap(),
        iterations: iters,
        residual,
        tangency,
    })
}

/// Bisection oracle for `G(x) = inf{y : AT_o(x,y) <= AT_e(y,x)}`.
///
/// Subsequence limits are taken from the iteration itself. Close to a
/// bifurcation the iteration may hit its cap; the last term is then used,
/// which is accurate to far better than the bisection width.
pub fn h_oracle(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("h_oracle needs x in (0,1], got {x}")));
    }
    let pred = |y: f64| {
        let (at_o, _) = iterate_to_limit(x, y, x, 1e-15, MAX_ITER);
        let (at_e_yx, _) = iterate_to_limit(y, x, 1.0, 1e-15, MAX_ITER);
        at_o <= at_e_yx
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xfun::{g_boundary, tangent_point, tower_limit_c};

    #[test]
    fn short_towers() {
        assert_eq!(at_n(0.3, 0.2, 0).unwrap(), 1.0);
        assert_eq!(at_n(0.3, 0.2, 1).unwrap(), 0.3);
        assert!((at_n(0.5, 0.5, 2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let (x, y) = (0.3f64, 0.2f64);
        let direct = x.powf(y.powf(x.powf(y.powf(x))));
        assert!((at_n(x, y, 5).unwrap() - direct).abs() < 1e-15);
        assert!(at_n(1.2, 0.5, 3).is_err());
    }

    #[test]
    fn limits_single_fixed_point() {
        let (e, o) = at_limits(0.5, 0.5, 1e-12).unwrap();
        let c = tower_limit_c(0.5).unwrap();
        assert!((e - c).abs() < 1e-10 && (o - c).abs() < 1e-10);
        assert_eq!(at_limits(1.0, 1.0, 1e-12).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn limits_split_below_boundary() {
        let (e, o) = at_limits(0.04, 0.04, 1e-12).unwrap();
        assert!(e > o + 0.1);
        assert!((two_step(0.04, 0.04, e) - e).abs() < 1e-10);
        assert!((two_step(0.04, 0.04, o) - o).abs() < 1e-10);
    }

    #[test]
    fn triple_below_boundary() {
        let fp = fixed_point_triple(0.04, 0.04).unwrap();
        let c = tower_limit_c(0.04).unwrap();
        let mid = fp.c_mid.unwrap();
        assert!(fp.at_o < mid && mid < fp.at_e);
        assert!((mid - c).abs() < 1e-10);
        assert!(fp.residual <= 1e-10);
    }

    #[test]
    fn single_fixed_point_at_y_one() {
        let fp = fixed_point_triple(0.04, 1.0).unwrap();
        assert!(fp.c_mid.is_none());
        assert!((fp.at_o - 0.04).abs() < 1e-12);
        assert_eq!(fp.at_o, fp.at_e);
    }

    #[test]
    fn tangency_at_the_boundary() {
        let x = 0.04;
        let fp = fixed_point_triple(x, g_boundary(x).unwrap()).unwrap();
        assert!((fp.at_o - tangent_point(x).unwrap()).abs() < 1e-8, "{fp:?}");
    }

    #[test]
    fn eqns_at_c_is_not_tangent() {
        let c = tower_limit_c(0.5).unwrap();
        let (r1, r2) = eqns_residual(0.5, 0.5, c);
        assert!(r1.abs() < 1e-12);
        assert!(r2.abs() > 0.1);
    }
}
