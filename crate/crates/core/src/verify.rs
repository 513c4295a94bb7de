//! Acceptance suites: fixed-seed checks of the main convergence results.

use std::collections::BTreeMap;
use std::f64::consts::{E, SQRT_2};

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alt::{at_limits, eqns_residual, fixed_point_triple, h_oracle};
use crate::classify::{
    classify_bounds, stopping_time_series, tail_sequence_for, Outcome, SupportBounds, TailCondition, TailSeq,
};
use crate::error::Result;
use crate::invtower::{monotonicity_audit, support_map, InvTowerCdf, InvTowerParams};
use crate::sim::{
    backward_samples, estimate_stopping_time, heavy_demo_bound, heavy_demo_logstar_bound, oscillation_gap,
    path_rng, run_paths, tower_backward_draws, tower_forward_draws, DistributionSpec, Draw,
};
use crate::stats::{ks_one_sample, ks_two_sample, EmpiricalCdf, KsResult};
use crate::xfun::{g_boundary, tangent_point, E_INV_E, E_NEG_E};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Significance level for every KS check.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: u8, title: &str, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        CriterionReport { id, title: title.to_string(), passed, checks }
    }

    /// `criterion N: PASS|FAIL title [check: pass|FAIL detail; …]`
    pub fn line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail))
            .collect();
        format!(
            "criterion {:>2}: {} {} [{}]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            parts.join("; ")
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Deterministic,
    Boundary,
    Example1,
    Example2,
    Stopping,
    Heavy,
    Oracles,
    All,
}

impl Suite {
    pub fn criteria(&self) -> Vec<u8> {
        match self {
            Suite::Deterministic => vec![1],
            Suite::Boundary => vec![2, 3, 4],
            Suite::Example1 => vec![5],
            Suite::Example2 => vec![6, 7],
            Suite::Stopping => vec![8],
            Suite::Heavy => vec![9],
            Suite::Oracles => vec![10],
            Suite::All => (1..=10).collect(),
        }
    }
}

pub const CRITERIA: u8 = 10;

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionReport> {
    Ok(match id {
        1 => deterministic_towers()?,
        2 => oscillation_regime()?,
        3 => g_cross_validation()?,
        4 => boundary_split(seed)?,
        5 => example1(seed)?,
        6 => example2(seed)?,
        7 => feasibility_boundary()?,
        8 => stopping_consistency(seed)?,
        9 => heavy_demo(seed),
        10 => oracle_equivalence(seed)?,
        _ => return Err(crate::Error::Domain(format!("no criterion {id}"))),
    })
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CriterionReport>> {
    suite.criteria().into_iter().map(|id| run_criterion(id, seed)).collect()
}

fn final_value(base: f64, depth: usize) -> crate::sim::TowerSample {
    *tower_forward_draws(&vec![Draw::Real(base); depth]).last().expect("depth >= 1")
}

pub fn deterministic_towers() -> Result<CriterionReport> {
    let t = final_value(SQRT_2, 60);
    let err = (t.value.to_f64() - 2.0).abs();
    let c1 = check("sqrt2_depth60", err <= 1e-9, format!("|T - 2| = {err:.3e}, tol 1e-9"));

    let t = final_value(E_INV_E, 10_000);
    let err = (t.value.to_f64() - E).abs();
    let c2 = check("e_inv_e_depth1e4", err <= 1e-6, format!("|T - e| = {err:.3e}, tol 1e-6"));

    let t = final_value(E_INV_E + 0.01, 10_000);
    let c3 = check("above_e_inv_e_diverges", t.diverged, format!("diverged = {}", t.diverged));
    Ok(CriterionReport::new(1, "deterministic towers", vec![c1, c2, c3]))
}

pub fn oscillation_regime() -> Result<CriterionReport> {
    let c = 0.04;
    let traj = tower_forward_draws(&vec![Draw::Real(c); 400]);
    let even = traj[399].value.to_f64();
    let odd = traj[398].value.to_f64();
    let (at_e, at_o) = at_limits(c, c, 1e-15)?;
    let (de, dodd) = ((even - at_e).abs(), (odd - at_o).abs());
    let c1 = check(
        "depth400_matches_limits",
        de <= 1e-6 && dodd <= 1e-6,
        format!("|T_400 - AT_e| = {de:.3e}, |T_399 - AT_o| = {dodd:.3e}, tol 1e-6"),
    );
    let r = eqns_residual(c, c, at_e).0.abs().max(eqns_residual(c, c, at_o).0.abs());
    let fp = fixed_point_triple(c, c)?;
    let c2 = check(
        "fixed_point_residual",
        r <= 1e-10 && fp.residual <= 1e-10,
        format!("limits residual {r:.3e}, triple residual {:.3e}, tol 1e-10", fp.residual),
    );
    Ok(CriterionReport::new(2, "oscillation regime", vec![c1, c2]))
}

pub fn g_cross_validation() -> Result<CriterionReport> {
    let (lo, hi) = (0.005, E_NEG_E);
    let xs: Vec<f64> = (1..=50).map(|i| lo + (hi - lo) * i as f64 / 51.0).collect();
    let devs: Vec<Result<f64>> = run_paths(xs.len(), |i| {
        let x = xs[i as usize];
        Ok((g_boundary(x)? - h_oracle(x)?).abs())
    });
    let mut max_dev = 0.0f64;
    for d in devs {
        max_dev = max_dev.max(d?);
    }
    let c1 = check("g_vs_oracle", max_dev <= 1e-6, format!("max |G - H| = {max_dev:.3e} on 50 points, tol 1e-6"));

    let mut worst = (0.0f64, 0.0f64);
    for x in [0.01, 0.04] {
        let (r1, r2) = eqns_residual(x, g_boundary(x)?, tangent_point(x)?);
        worst = (worst.0.max(r1.abs()), worst.1.max(r2.abs()));
    }
    let c2 = check(
        "tangency_equations",
        worst.0 <= 1e-10 && worst.1 <= 1e-8,
        format!("residuals ({:.3e}, {:.3e}), tol (1e-10, 1e-8)", worst.0, worst.1),
    );
    Ok(CriterionReport::new(3, "G cross-validation", vec![c1, c2]))
}

pub fn boundary_split(seed: u64) -> Result<CriterionReport> {
    let b = 0.04;
    let g = g_boundary(b)?;
    let (depth, paths) = (400, 1000);

    let a = g - 0.005;
    let conv = oscillation_gap(&DistributionSpec::Uniform { lo: a, hi: b }, depth + 1, paths, seed)?;
    let med = conv.per_path_gaps.median;
    let c1 = check("converging_side", med.abs() <= 1e-4, format!("a = {a:.6}, median gap {med:.3e}, tol 1e-4"));

    let a = g + 0.005;
    let div = oscillation_gap(&DistributionSpec::Uniform { lo: a, hi: b }, depth + 1, paths, seed.wrapping_add(1))?;
    let floor = at_limits(a, b, 1e-15)?.0 - at_limits(b, a, 1e-15)?.1;
    let med = div.per_path_gaps.median;
    let c2 = check(
        "diverging_side",
        med >= floor - 1e-3,
        format!("a = {a:.6}, median gap {med:.4}, floor {floor:.4} - 1e-3"),
    );
    Ok(CriterionReport::new(4, "boundary split", vec![c1, c2]))
}

fn ks_check(name: &str, r: &KsResult) -> Check {
    check(name, r.p_value > KS_ALPHA, format!("D = {:.4e}, p = {:.4}, need p > {KS_ALPHA}", r.statistic, r.p_value))
}

fn finals(samples: &[crate::sim::TowerSample]) -> Vec<f64> {
    samples.iter().map(|s| s.value.to_f64()).collect()
}

fn uniform_cdf(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `(UV)^W` with independent uniforms.
fn example1_direct(n: usize, seed: u64) -> Vec<f64> {
    run_paths(n, |i| {
        let mut rng = path_rng(seed, i);
        let u: f64 = rng.sample(Open01);
        let v: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        (u * v).powf(w)
    })
}

pub fn example1(seed: u64) -> Result<CriterionReport> {
    let n = 100_000;
    let tower = finals(&backward_samples(&DistributionSpec::ProductUniform {}, 40, n, seed));
    let c1 = ks_check("backward_depth40", &ks_one_sample(&tower, uniform_cdf)?);
    let direct = example1_direct(n, seed.wrapping_add(1));
    let c2 = ks_check("direct_uv_pow_w", &ks_one_sample(&direct, uniform_cdf)?);
    Ok(CriterionReport::new(5, "example 1", vec![c1, c2]))
}

/// `A^T` with `A ~ F` and `T = U^r`, `U ~ Unif[alpha, beta]`.
fn fixed_point_law(params: InvTowerParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let cdf = InvTowerCdf::new(params)?;
    run_paths(n, |i| {
        let mut rng = path_rng(seed, i);
        let a = cdf.sample(&mut rng)?;
        let u: f64 = rng.random();
        let t = (params.alpha + (params.beta - params.alpha) * u).powf(params.r);
        Ok(a.powf(t))
    })
    .into_iter()
    .collect()
}

pub fn example2(seed: u64) -> Result<CriterionReport> {
    let r = 0.5;
    let n = 100_000;
    let tower = finals(&backward_samples(&DistributionSpec::MaxExample2 { r }, 40, n, seed));
    let c1 = ks_check("tower_law_x2", &ks_one_sample(&tower, |x| uniform_cdf(x).powf(1.0 / r))?);

    let f = InvTowerCdf::new(InvTowerParams::new(0.0, 1.0, r))?;
    let max_err = (1..1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            (f.eval(x) - x * x * (1.0 - x.ln())).abs()
        })
        .fold(0.0, f64::max);
    let c2 = check("cdf_closed_form", max_err <= 1e-12, format!("max |F - x^2(1 - ln x)| = {max_err:.3e}, tol 1e-12"));

    let params = InvTowerParams::new(0.5, 2.0, 0.3);
    let s = fixed_point_law(params, 20_000, seed.wrapping_add(1))?;
    let c3 = ks_check("fixed_point_law", &ks_one_sample(&s, |x| params.target_cdf(x))?);
    Ok(CriterionReport::new(6, "example 2 round trip", vec![c1, c2, c3]))
}

pub const AUDIT_GRID: usize = 4000;

pub fn feasibility_boundary() -> Result<CriterionReport> {
    let mut checks = Vec::new();
    for beta in [1.2, 2.0] {
        let bound = InvTowerParams::new(0.0, beta, 0.0).r_bound();
        let at = monotonicity_audit(&InvTowerCdf::unchecked(InvTowerParams::new(0.0, beta, bound)), AUDIT_GRID);
        checks.push(check(
            &format!("beta{beta}_at_bound"),
            at.is_empty(),
            format!("r = {bound:.6}, {} violations", at.len()),
        ));
        let r = 1.05 * bound;
        let above = monotonicity_audit(&InvTowerCdf::unchecked(InvTowerParams::new(0.0, beta, r)), AUDIT_GRID);
        checks.push(check(
            &format!("beta{beta}_above_bound"),
            !above.is_empty(),
            format!("r = {r:.6}, {} violations", above.len()),
        ));
    }
    Ok(CriterionReport::new(7, "feasibility boundary", checks))
}

pub fn stopping_consistency(seed: u64) -> Result<CriterionReport> {
    let uni = DistributionSpec::Uniform { lo: 1.0, hi: 2.0 };
    let est = estimate_stopping_time(&uni, 1000, 10_000, seed)?;
    let c1 = check(
        "uniform_censoring",
        est.censored_fraction >= 0.4,
        format!("censored fraction {:.4} at n_cap 1000, need >= 0.4", est.censored_fraction),
    );
    let q = tail_sequence_for(&uni, 64)?;
    let v = classify_bounds(uni.support(), &TailCondition::TailSequence(q))?;
    let c2 = check(
        "uniform_verdict",
        v.outcome == Outcome::DivergesToInfinityAS,
        format!("{:?} by {}", v.outcome, v.rule.id()),
    );

    let tail = DistributionSpec::LogStarTail { q: TailSeq::Power { exponent: 0.5 } };
    let n_cap = 10_000;
    let est = estimate_stopping_time(&tail, n_cap, 20_000, seed.wrapping_add(1))?;
    let q = tail_sequence_for(&tail, n_cap)?;
    let series = stopping_time_series(&q, n_cap).censored_mean(n_cap);
    let dev = (est.mean_censored - series).abs();
    let c3 = check(
        "log_star_tail_series_vs_mc",
        dev <= 3.0 * est.std_error,
        format!("series {series:.5}, MC {:.5} +- {:.5}, |diff| {dev:.5}", est.mean_censored, est.std_error),
    );
    let v = classify_bounds(tail.support(), &TailCondition::TailSequence(q))?;
    let c4 = check(
        "log_star_tail_verdict",
        v.outcome == Outcome::ConvergesAS,
        format!("{:?} by {}", v.outcome, v.rule.id()),
    );
    Ok(CriterionReport::new(8, "stopping-time consistency", vec![c1, c2, c3, c4]))
}

pub fn heavy_demo(seed: u64) -> CriterionReport {
    let bound = heavy_demo_bound();
    let paths = 10_000;
    let mut checks = Vec::new();
    let mut depth1 = None;
    for depth in [1, 5, 10] {
        let est = heavy_demo_logstar_bound(depth, paths, seed.wrapping_add(depth as u64));
        checks.push(check(
            &format!("depth{depth}_below_bound"),
            est.mean < bound,
            format!("E[log* T] = {:.4} +- {:.4}, bound {bound:.4}", est.mean, est.std_error),
        ));
        if depth == 1 {
            depth1 = Some(est);
        }
    }
    let est = depth1.expect("depth 1 ran");
    let dev = (est.mean - 1.0).abs();
    checks.push(check(
        "depth1_equals_one",
        dev <= 3.0 * est.std_error,
        format!("|{:.4} - 1| = {dev:.4}, 3 SE = {:.4}", est.mean, 3.0 * est.std_error),
    ));
    CriterionReport::new(9, "heavy-tailed demo", checks)
}

/// Exact law of `T_depth` for i.i.d. bases on finitely many atoms, keyed by
/// the value's bit pattern.
pub fn enumerate_law(atoms: &[(f64, f64)], depth: usize, backward: bool) -> BTreeMap<(u32, u64), f64> {
    let mut law = BTreeMap::new();
    let k = atoms.len();
    let total = k.pow(depth as u32);
    for code in 0..total {
        let mut c = code;
        let mut draws = Vec::with_capacity(depth);
        let mut p = 1.0;
        for _ in 0..depth {
            let (v, pv) = atoms[c % k];
            draws.push(Draw::Real(v));
            p *= pv;
            c /= k;
        }
        let t = if backward {
            tower_backward_draws(&draws).value
        } else {
            tower_forward_draws(&draws).last().expect("depth >= 1").value
        };
        *law.entry((t.level(), t.mantissa().to_bits())).or_insert(0.0) += p;
    }
    law
}

/// `sup |F_n - F|` checked at every sample and just below it, in quadratic time.
pub fn ks_brute_one(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for &x in samples {
        let le = samples.iter().filter(|&&s| s <= x).count() as f64 / n;
        let lt = samples.iter().filter(|&&s| s < x).count() as f64 / n;
        let f = cdf(x);
        d = d.max((le - f).abs()).max((lt - f).abs());
    }
    d
}

/// `sup |F_x - F_y|` over the pooled sample points, in quadratic time.
pub fn ks_brute_two(x: &[f64], y: &[f64]) -> f64 {
    let (ex, ey) = (EmpiricalCdf::new(x), EmpiricalCdf::new(y));
    x.iter().chain(y).map(|&z| (ex.eval(z) - ey.eval(z)).abs()).fold(0.0, f64::max)
}

pub fn oracle_equivalence(seed: u64) -> Result<CriterionReport> {
    let mut mismatches = 0;
    let mut compared = 0;
    for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let atoms = [(0.5, p), (2.0, 1.0 - p)];
        for depth in 1..=6 {
            let f = enumerate_law(&atoms, depth, false);
            let b = enumerate_law(&atoms, depth, true);
            compared += 1;
            let same = f.len() == b.len()
                && f.iter().zip(&b).all(|((kf, pf), (kb, pb))| kf == kb && (pf - pb).abs() <= 1e-15);
            if !same {
                mismatches += 1;
            }
        }
    }
    let c1 = check(
        "forward_backward_enumeration",
        mismatches == 0,
        format!("{mismatches} of {compared} (p, depth) laws differ"),
    );

    let n = 64;
    let ex1 = finals(&backward_samples(&DistributionSpec::ProductUniform {}, 40, n, seed));
    let ex2 = finals(&backward_samples(&DistributionSpec::MaxExample2 { r: 0.5 }, 40, n, seed));
    let params = InvTowerParams::new(0.5, 2.0, 0.3);
    let fp = fixed_point_law(params, n, seed)?;
    let direct = example1_direct(n, seed);
    type Cdf = Box<dyn Fn(f64) -> f64>;
    let one: Vec<(&[f64], Cdf)> = vec![
        (&ex1, Box::new(uniform_cdf)),
        (&direct, Box::new(uniform_cdf)),
        (&ex2, Box::new(|x| uniform_cdf(x).powi(2))),
        (&fp, Box::new(move |x| params.target_cdf(x))),
    ];
    let mut worst = 0.0f64;
    for (s, cdf) in &one {
        let fast = ks_one_sample(s, cdf)?.statistic;
        worst = worst.max((fast - ks_brute_one(s, cdf)).abs());
    }
    for (x, y) in [(&ex1, &direct), (&ex2, &fp), (&ex1, &ex2)] {
        let fast = ks_two_sample(x, y)?.statistic;
        worst = worst.max((fast - ks_brute_two(x, y)).abs());
    }
    let c2 = check("ks_brute_force", worst <= 1e-15, format!("max |D_fast - D_brute| = {worst:.3e}"));

    let m = support_map(SupportBounds { a: 0.2, b: 0.5 })?;
    let c3 = check(
        "inv_bounds_example",
        !m.consistent && m.a_pow_a > m.b_pow_b,
        format!("a^a = {:.4} > b^b = {:.4}, consistent = {}", m.a_pow_a, m.b_pow_b, m.consistent),
    );
    Ok(CriterionReport::new(10, "oracle equivalence", vec![c1, c2, c3]))
}
