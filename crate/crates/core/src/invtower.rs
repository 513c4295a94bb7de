//! Inverse tower distributions for powers of uniforms.
//!
//! For `T = U^r` with `U ~ Unif[alpha, beta]`, the law `F` of `A` with
//! `A^T ≅ T` (and hence with tower limit distributed as `T`) satisfies
//!
//! ```text
//! F(x) = x^{bp}/b^p (1 - b ln x) - (a/b)^p + (a/b)^p F(x^{b/a})
//! ```
//!
//! on `[a^{1/b}, b^{1/b})`, where `a = alpha^r`, `b = beta^r`, `p = 1/r`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::SupportBounds;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvTowerParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: String,
}

impl InvTowerParams {
    pub fn new(alpha: f64, beta: f64, r: f64) -> Self {
        InvTowerParams { alpha, beta, r }
    }

    pub fn a(&self) -> f64 {
        self.alpha.powf(self.r)
    }

    pub fn b(&self) -> f64 {
        self.beta.powf(self.r)
    }

    pub fn p(&self) -> f64 {
        1.0 / self.r
    }

    /// Largest admissible `r` for this `beta`.
    pub fn r_bound(&self) -> f64 {
        1.0 / (1.0 + self.beta.ln())
    }

    fn check_syntax(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite()) || self.alpha < 0.0 {
            return Err(Error::Domain(format!("need 0 <= alpha finite, got alpha = {}", self.alpha)));
        }
        if self.alpha.is_nan() || self.beta.is_nan() || self.beta <= self.alpha {
            return Err(Error::Domain(format!("need beta > alpha, got {} <= {}", self.beta, self.alpha)));
        }
        if self.r.is_nan() {
            return Err(Error::Domain("r is NaN".into()));
        }
        Ok(())
    }

    /// Whether `U^r` has a tower distribution, with the deciding condition.
    pub fn feasibility(&self) -> Feasibility {
        let no = |reason: String| Feasibility { feasible: false, reason };
        if let Err(e) = self.check_syntax() {
            return no(e.to_string());
        }
        if self.r.is_infinite() {
            return no("p = 1/r = 0 (law of exp(U)) has no inverse tower distribution".into());
        }
        if !(self.alpha <= 1.0 && 1.0 <= self.beta) {
            return no(format!("1 is not in [alpha, beta] = [{}, {}]", self.alpha, self.beta));
        }
        if self.r < 0.0 {
            return no(format!("r = {} is negative", self.r));
        }
        let bound = self.r_bound();
        if self.r > bound {
            return no(format!(
                "r = {} exceeds 1/(1 + ln beta) = {bound}",
                self.r
            ));
        }
        Feasibility { feasible: true, reason: format!("1 in [{}, {}] and 0 <= r <= {bound}", self.alpha, self.beta) }
    }

    /// Support of `F`: `[a^{1/b}, b^{1/b}]`.
    pub fn support(&self) -> (f64, f64) {
        if self.r == 0.0 {
            return (1.0, 1.0);
        }
        let (a, b) = (self.a(), self.b());
        (a.powf(1.0 / b), b.powf(1.0 / b))
    }

    /// CDF of `T = U^r`: `(x^{1/r} - alpha)/(beta - alpha)` on its support.
    pub fn target_cdf(&self, x: f64) -> f64 {
        if self.r == 0.0 {
            return if x >= 1.0 { 1.0 } else { 0.0 };
        }
        if x <= 0.0 {
            return 0.0;
        }
        ((x.powf(self.p()) - self.alpha) / (self.beta - self.alpha)).clamp(0.0, 1.0)
    }
}

/// The recursive distribution function `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvTowerCdf {
    pub params: InvTowerParams,
    pub truncation_tol: f64,
}

/// One evaluation with the number of unrolled recursion steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdfEval {
    pub value: f64,
    pub steps: usize,
    pub truncated: bool,
}

impl InvTowerCdf {
    /// Checked constructor; infeasible parameters are rejected.
    pub fn new(params: InvTowerParams) -> Result<Self> {
        let f = params.feasibility();
        if !f.feasible {
            return Err(Error::Infeasible(f.reason));
        }
        Ok(Self::unchecked(params))
    }

    /// Builds `F` for any syntactically valid parameters, for auditing.
    pub fn unchecked(params: InvTowerParams) -> Self {
        InvTowerCdf { params, truncation_tol: 1e-14 }
    }

    /// `F(1)`.
    pub fn value_at_one(&self) -> f64 {
        let pr = self.params;
        if pr.r == 0.0 {
            return 1.0;
        }
        let (a, b, p) = (pr.a(), pr.b(), pr.p());
        let ap = a.powf(p);
        (1.0 - ap) / (b.powf(p) - ap)
    }

    fn base(&self, x: f64) -> f64 {
        let pr = self.params;
        let (a, b, p) = (pr.a(), pr.b(), pr.p());
        x.powf(b * p) / b.powf(p) * (1.0 - b * x.ln()) - (a / b).powf(p)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_instrumented(x).value
    }

    /// `F(x)` with the recursion unrolled iteratively.
    pub fn eval_instrumented(&self, x: f64) -> CdfEval {
        let pr = self.params;
        if pr.r == 0.0 {
            return CdfEval { value: if x >= 1.0 { 1.0 } else { 0.0 }, steps: 0, truncated: false };
        }
        let (a, b, p) = (pr.a(), pr.b(), pr.p());
        let (lo, hi) = (a.powf(1.0 / b), b.powf(1.0 / b));
        let ratio = (a / b).powf(p);
        let f1 = self.value_at_one();

        let mut x = x;
        let mut coef = 1.0;
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            if x.is_nan() || x <= 0.0 || x < lo {
                break;
            }
            if x >= hi {
                total += coef;
                break;
            }
            if x == 1.0 {
                total += coef * f1;
                break;
            }
            total += coef * self.base(x);
            steps += 1;
            coef *= ratio;
            if coef == 0.0 {
                break;
            }
            if coef < self.truncation_tol {
                return CdfEval { value: total, steps, truncated: true };
            }
            x = x.powf(b / a);
        }
        CdfEval { value: total, steps, truncated: false }
    }

    /// Generalized inverse `inf{x : F(x) >= u}` by bisection.
    pub fn inv_sample(&self, u: f64) -> Result<f64> {
        let f = self.params.feasibility();
        if !f.feasible {
            return Err(Error::Infeasible(f.reason));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("u must lie in [0,1], got {u}")));
        }
        if self.params.r == 0.0 || u == self.value_at_one() {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = self.params.support();
        if u <= 0.0 {
            return Ok(lo);
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let u: f64 = rng.sample(Open01);
        self.inv_sample(u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `F(x_next) < F(x)` on adjacent grid points.
    Decrease { x: f64, x_next: f64, f: f64, f_next: f64 },
    /// `F(x)` outside `[0, 1]`.
    OutOfRange { x: f64, f: f64 },
}

/// Scans `F` for decreases and values outside `[0,1]` on a uniform grid
/// over `[a^{1/b}(1 - 1e-9), b^{1/b}]`.
pub fn monotonicity_audit(cdf: &InvTowerCdf, grid_size: usize) -> Vec<Violation> {
    let grid_size = grid_size.max(2);
    let (lo, hi) = cdf.params.support();
    let lo = lo * (1.0 - 1e-9);
    let step = (hi - lo) / (grid_size - 1) as f64;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid_size {
        let x = if i == grid_size - 1 { hi } else { lo + step * i as f64 };
        let f = cdf.eval(x);
        if !(-1e-12..=1.0 + 1e-12).contains(&f) {
            out.push(Violation::OutOfRange { x, f });
        }
        if let Some((px, pf)) = prev {
            if f < pf - 1e-13 {
                out.push(Violation::Decrease { x: px, x_next: x, f: pf, f_next: f });
            }
        }
        prev = Some((x, f));
    }
    out
}

/// Support of `Y` forced by `X ≅ Y^X` when `supp X` spans `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportMap {
    pub lower: f64,
    pub upper: f64,
    /// `a^a` and `b^b`; a tower law needs `a^a <= b^b`.
    pub a_pow_a: f64,
    pub b_pow_b: f64,
    /// All necessary conditions hold; otherwise no `Y` exists.
    pub consistent: bool,
}

pub fn support_map(x_bounds: SupportBounds) -> Result<SupportMap> {
    let SupportBounds { a, b } = x_bounds;
    if !(a >= 0.0 && a <= b && b.is_finite() && b > 0.0) {
        return Err(Error::InvalidBounds(format!("need 0 <= a <= b < inf, got [{a}, {b}]")));
    }
    if a == 0.0 && b == 1.0 {
        return Err(Error::DegenerateCase("support [0, 1] leaves sup supp Y undetermined".into()));
    }
    let (a_inv_a, b_inv_a) = if a == 0.0 {
        let b_lim = if b > 1.0 {
            f64::INFINITY
        } else if b < 1.0 {
            0.0
        } else {
            1.0
        };
        (0.0, b_lim)
    } else {
        (a.powf(1.0 / a), b.powf(1.0 / a))
    };
    let lower = a_inv_a.max(a.powf(1.0 / b));
    let upper = b_inv_a.min(b.powf(1.0 / b));
    let a_pow_a = if a == 0.0 { 1.0 } else { a.powf(a) };
    let b_pow_b = b.powf(b);
    let consistent = lower <= upper && a_pow_a <= b_pow_b;
    Ok(SupportMap { lower, upper, a_pow_a, b_pow_b, consistent })
}

/// One draw of `max(V1^{r/(1-r)}, V2 V3)`.
pub fn example2_sampler<R: Rng + ?Sized>(r: f64, rng: &mut R) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r must lie in (0,1), got {r}")));
    }
    let v1: f64 = rng.sample(Open01);
    let v2: f64 = rng.sample(Open01);
    let v3: f64 = rng.sample(Open01);
    Ok(v1.powf(r / (1.0 - r)).max(v2 * v3))
}

/// CDF of `max(V1^{r/(1-r)}, V2 V3)`: `x^{1/r}(1 - ln x)` on `(0, 1)`.
pub fn example2_cdf(r: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powf(1.0 / r) * (1.0 - x.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasibility_examples() {
        assert!(InvTowerParams::new(0.0, 1.0, 0.5).feasibility().feasible);
        assert!(!InvTowerParams::new(0.5, 2.0, 0.7).feasibility().feasible);
        let f = InvTowerParams::new(1.5, 2.0, 0.1).feasibility();
        assert!(!f.feasible && f.reason.contains("not in"));
        assert!(InvTowerParams::new(0.5, 2.0, 0.0).feasibility().feasible);
        assert!(!InvTowerParams::new(0.5, 2.0, f64::INFINITY).feasibility().feasible);
    }

    #[test]
    fn value_at_one() {
        let f = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.3)).unwrap();
        assert!((f.eval(1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_alpha_zero() {
        let f = InvTowerCdf::new(InvTowerParams::new(0.0, 1.0, 0.5)).unwrap();
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let want = x * x * (1.0 - x.ln());
            assert!((f.eval(x) - want).abs() < 1e-12);
        }
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.5), 1.0);
    }

    #[test]
    fn below_support_is_zero() {
        let f = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.3)).unwrap();
        let (lo, _) = f.params.support();
        assert_eq!(f.eval(lo * 0.999), 0.0);
    }

    #[test]
    fn step_law_at_r_zero() {
        let f = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.0)).unwrap();
        assert_eq!(f.eval(0.999), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.inv_sample(0.3).unwrap(), 1.0);
    }

    #[test]
    fn round_trip_sample() {
        let f = InvTowerCdf::new(InvTowerParams::new(0.0, 1.0, 0.5)).unwrap();
        let x = f.inv_sample(f.eval(0.5)).unwrap();
        assert!((x - 0.5).abs() < 1e-10);
        let g = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.3)).unwrap();
        assert_eq!(g.inv_sample(g.value_at_one()).unwrap(), 1.0);
    }

    #[test]
    fn support_map_examples() {
        let m = support_map(SupportBounds { a: 0.2, b: 0.5 }).unwrap();
        assert!(!m.consistent);
        assert!((m.a_pow_a - 0.7248).abs() < 1e-4 && (m.b_pow_b - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((m.lower - 0.04).abs() < 1e-15 && (m.upper - 0.03125).abs() < 1e-15);
        let m = support_map(SupportBounds { a: 1.0, b: 1.0 }).unwrap();
        assert_eq!((m.lower, m.upper), (1.0, 1.0));
        assert!(support_map(SupportBounds { a: 0.0, b: 1.0 }).is_err());
    }
}
