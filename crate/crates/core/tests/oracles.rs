//! Library values against independent reference computations.

use std::f64::consts::E;

use powertower::alt::{at_limits, at_n, h_oracle};
use powertower::classify::{stopping_time_series, tail_sequence_for, Outcome, TailSeq};
use powertower::invtower::{example2_cdf, InvTowerCdf, InvTowerParams};
use powertower::sim::{tetration_draw, DistributionSpec, Draw};
use powertower::stats::ks_one_sample;
use powertower::xfun::{
    g_boundary, lambert_w0, log_star, tetrate, tower_limit_c, LevelIndex, E_INV_E, E_NEG_E,
};

// Halley iteration on w e^w = x from a crude start.
fn lambert_ref(x: f64) -> f64 {
    let mut w = if x < 1.0 { x / (1.0 + x).max(0.2) } else { x.ln() - x.ln().ln().max(0.0) };
    for _ in 0..200 {
        let ew = w.exp();
        let f = w * ew - x;
        let d = ew * (w + 1.0);
        let step = f / (d - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if step.abs() < 1e-17 * w.abs().max(1e-300) {
            break;
        }
    }
    w
}

// Composite Simpson on [a, b] with n (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn lambert_matches_halley() {
    for &x in &[-0.3f64, -0.1, -1e-4, 1e-6, 0.25, 1.0, 2.0, 10.0, 1e3, 1e8] {
        let w = lambert_w0(x).unwrap().value;
        let r = lambert_ref(x);
        assert!((w - r).abs() <= 1e-13 * r.abs().max(1e-3), "x = {x}: {w} vs {r}");
    }
    // omega constant
    assert!((lambert_w0(1.0).unwrap().value - 0.567_143_290_409_783_8).abs() < 1e-15);
}

#[test]
fn tower_limit_matches_iteration() {
    for &x in &[0.07f64, 0.1, 0.3, 0.5, 0.9, 0.999] {
        let mut t = 1.0;
        for _ in 0..200_000 {
            t = x.powf(t);
        }
        let c = tower_limit_c(x).unwrap();
        assert!((c - t).abs() < 1e-9, "x = {x}: {c} vs {t}");
        assert!((x.powf(c) - c).abs() < 1e-14);
    }
}

#[test]
fn g_boundary_matches_tangency_oracle() {
    for &x in &[1e-4f64, 1e-3, 0.01, 0.04, 0.06] {
        let g = g_boundary(x).unwrap();
        let h = h_oracle(x).unwrap();
        assert!((g - h).abs() < 1e-6, "x = {x}: G = {g}, oracle = {h}");
        assert!(g <= x);
    }
    assert!((g_boundary(0.04).unwrap() - 0.029_461_5).abs() < 1e-7);
    assert_eq!(g_boundary(E_NEG_E).unwrap(), E_NEG_E);
    assert_eq!(g_boundary(0.5).unwrap(), 0.5);
}

#[test]
fn alternating_tower_limits() {
    // x = y reduces to the ordinary tower
    for n in 0..30 {
        let a = at_n(0.3, 0.3, n).unwrap();
        assert_eq!(a, tetrate(0.3, n as u64).to_f64());
    }
    // below G(0.04) the two subsequences meet; above it they split
    let (e, o) = at_limits(0.04, 0.02, 1e-14).unwrap();
    assert!((e - o).abs() < 1e-10);
    let (e, o) = at_limits(0.04, 0.035, 1e-14).unwrap();
    assert!((e - o).abs() > 0.1);
}

#[test]
fn log_star_of_tetrations() {
    for n in 0..6 {
        let t = tetrate(E, n);
        assert_eq!(log_star(t), n);
        if t.is_finite_f64() && n > 0 {
            assert_eq!(log_star(LevelIndex::from_f64(t.to_f64() * (1.0 + 1e-12))), n + 1);
        }
    }
    assert!((tetrate(E_INV_E, 3).to_f64() - E_INV_E.powf(E_INV_E.powf(E_INV_E))).abs() < 1e-15);
}

#[test]
fn stopping_series_against_direct_products() {
    // constant q: geometric stopping time with mean 1/q
    let s = stopping_time_series(&TailSeq::Constant { value: 0.25 }, 100_000);
    assert!((s.value() - 4.0).abs() < 1e-10);
    assert_eq!(s.verdict.outcome, Outcome::ConvergesAS);

    let q = TailSeq::Power { exponent: 0.5 };
    let s = stopping_time_series(&q, 5000);
    let mut prod = 1.0;
    let mut sum = 0.0;
    for k in 1..=5000u64 {
        sum += prod;
        prod *= 1.0 - (k as f64).powf(-0.5);
    }
    assert!((s.censored_mean(5000) - sum).abs() < 1e-10, "{} vs {sum}", s.censored_mean(5000));

    let s = stopping_time_series(&TailSeq::Geometric { ratio: 0.5 }, 100_000);
    assert_eq!(s.verdict.outcome, Outcome::DivergesToInfinityAS);
}

#[test]
fn uniform_tail_sequence() {
    let q = tail_sequence_for(&DistributionSpec::Uniform { lo: 1.0, hi: 2.0 }, 10).unwrap();
    assert!((q.at(1) - (1.0 / E).exp_m1()).abs() < 1e-15);
    assert!((q.at(2) - (E.powf(-E)).exp_m1()).abs() < 1e-15);
    assert!((q.at(1) - 0.444_667_861).abs() < 1e-9);
}

#[test]
fn inverse_tower_fixed_point_by_quadrature() {
    // P(A^T <= x) = E[F(x^{1/T})] with T = U^r, U ~ Unif[alpha, beta]
    for &(alpha, beta, r) in &[(0.5f64, 2.0f64, 0.3f64), (0.0, 2.0, 0.5), (0.8, 1.5, 0.6)] {
        let p = InvTowerParams::new(alpha, beta, r);
        assert!(p.feasibility().feasible);
        let f = InvTowerCdf::new(p).unwrap();
        let (lo, hi) = p.support();
        for i in 1..20 {
            let x = lo.max(1e-3) + (hi.min(3.0) - lo.max(1e-3)) * i as f64 / 20.0;
            let lhs = simpson(|u| f.eval(x.powf(1.0 / u.powf(r).max(1e-300))), alpha, beta, 20_000) / (beta - alpha);
            let target = (((x.powf(1.0 / r)) - alpha) / (beta - alpha)).clamp(0.0, 1.0);
            assert!((lhs - target).abs() < 2e-4, "({alpha},{beta},{r}) x = {x}: {lhs} vs {target}");
            assert!((p.target_cdf(x) - target).abs() < 1e-12);
        }
    }
    let f = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.3)).unwrap();
    assert!((f.value_at_one() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn product_uniform_fixed_point_by_quadrature() {
    // T ~ Unif(0,1) independent of A = UV gives A^T ~ Unif(0,1)
    let dist = DistributionSpec::ProductUniform {};
    for &x in &[0.05f64, 0.2, 0.5, 0.8, 0.95] {
        let v = simpson(|t| dist.cdf(x.powf(1.0 / t.max(1e-12))).unwrap(), 0.0, 1.0, 20_000);
        assert!((v - x).abs() < 1e-6, "x = {x}: {v}");
    }
}

#[test]
fn example2_fixed_point_by_quadrature() {
    for &r in &[0.3f64, 0.5, 0.7] {
        for &x in &[0.1f64, 0.4, 0.7, 0.9] {
            let dens = |t: f64| t.powf(1.0 / r - 1.0) / r;
            let v = simpson(|t| example2_cdf(r, x.powf(1.0 / t.max(1e-12))) * dens(t), 0.0, 1.0, 20_000);
            assert!((v - x.powf(1.0 / r)).abs() < 1e-5, "r = {r}, x = {x}: {v}");
        }
    }
}

#[test]
fn example2_cdf_matches_sampling() {
    use powertower::sim::path_rng;
    use rand::Rng;
    let r = 0.5;
    let mut rng = path_rng(7, 0);
    let xs: Vec<f64> = (0..20_000)
        .map(|_| {
            let (v1, v2, v3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            v1.powf(r / (1.0 - r)).max(v2 * v3)
        })
        .collect();
    let ks = ks_one_sample(&xs, |x| example2_cdf(r, x)).unwrap();
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn heavy_demo_first_level_log_star_is_three_halves() {
    // atoms e⋆n and e^{1/(e⋆16n)}, each with probability 2^{-(n+1)}
    let mut exact = 0.0;
    let mut lib = 0.0;
    for n in 1..=60u64 {
        let p = 0.5f64.powi(n as i32 + 1);
        exact += p * (n as f64 + 1.0);
        lib += p * tetration_draw(n).log_star_pow(LevelIndex::ONE) as f64;
        let near = Draw::NearOne { inv_log: tetrate(E, 16 * n), log_star: 16 * n };
        lib += p * near.log_star_pow(LevelIndex::ONE) as f64;
    }
    assert!((exact - 1.5).abs() < 1e-15);
    assert!((lib - 1.5).abs() < 1e-15, "{lib}");

    let est = powertower::sim::heavy_demo_logstar_bound(1, 20_000, 11);
    assert!((est.mean - 1.5).abs() < 4.0 * est.std_error, "{est:?}");
}

#[test]
fn heavy_demo_bound_holds_at_depth() {
    let bound = powertower::sim::heavy_demo_bound();
    assert!((bound - 8.0 * (1.0 + (1.0 - 2f64.ln()).sqrt()) / 2f64.ln()).abs() < 1e-12);
    for depth in [2, 5, 10] {
        let est = powertower::sim::heavy_demo_logstar_bound(depth, 5000, 3);
        assert!(est.mean < bound, "depth {depth}: {est:?}");
    }
}

#[test]
fn uniform_1_2_stopping_mean() {
    let dist = DistributionSpec::Uniform { lo: 1.0, hi: 2.0 };
    let q = tail_sequence_for(&dist, 80).unwrap();
    let series = stopping_time_series(&q, 1000).censored_mean(1000);
    let est = powertower::sim::estimate_stopping_time(&dist, 1000, 4000, 5).unwrap();
    let sd = est.std_error.max(1e-3);
    assert!((est.mean_censored - series).abs() < 4.0 * sd, "{est:?} vs {series}");
}
