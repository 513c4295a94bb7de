use powertower::alt::at_n;
use powertower::classify::{classify_bounds, Outcome, SupportBounds, TailCondition};
use powertower::invtower::{InvTowerCdf, InvTowerParams};
use powertower::sim::{backward_samples, tower_backward_draws, tower_forward_draws, DistributionSpec, Draw};
use powertower::stats::{ks_one_sample, ks_two_sample, EmpiricalCdf};
use powertower::verify::{ks_brute_one, ks_brute_two};
use powertower::xfun::{g_boundary, lambert_w0, li_pow, log_star_f64, LevelIndex, E_INV_E, E_NEG_E};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn level_index_order_matches_f64(x in 0.0f64..1e300, y in 0.0f64..1e300) {
        let (a, b) = (LevelIndex::from_f64(x), LevelIndex::from_f64(y));
        prop_assert_eq!(a.cmp(&b), x.partial_cmp(&y).unwrap());
        prop_assert!((a.to_f64() - x).abs() <= 1e-12 * x);
    }

    #[test]
    fn level_index_exp_ln_round_trip(x in 1e-3f64..700.0) {
        let e = LevelIndex::from_f64(x).exp();
        prop_assert!((e.to_f64() / x.exp() - 1.0).abs() < 1e-12);
        let back = e.ln().to_f64().unwrap();
        prop_assert!((back - x).abs() < 1e-12 * x.max(1.0));
    }

    #[test]
    fn li_pow_matches_powf(base in 0.01f64..10.0, e in 0.0f64..50.0) {
        let direct = base.powf(e);
        let li = li_pow(base, LevelIndex::from_f64(e)).to_f64();
        prop_assert!((li - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn lambert_residual(x in -0.367879f64..1e6) {
        let w = lambert_w0(x).unwrap();
        prop_assert!((w.value * w.value.exp() - x).abs() <= 1e-12 * x.abs().max(1e-3));
        prop_assert!(w.value >= -1.0);
    }

    #[test]
    fn g_below_identity(x in 1e-6f64..1.0) {
        let g = g_boundary(x).unwrap();
        prop_assert!(g > 0.0 && g <= x);
        if x >= E_NEG_E {
            prop_assert_eq!(g, x);
        }
    }

    #[test]
    fn g_is_increasing(x in 1e-6f64..0.065, dx in 1e-6f64..1e-3) {
        prop_assert!(g_boundary(x).unwrap() <= g_boundary((x + dx).min(1.0)).unwrap());
    }

    #[test]
    fn alternating_tower_in_unit_interval(x in 0.0f64..=1.0, y in 0.0f64..=1.0, n in 0u32..60) {
        let t = at_n(x, y, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
    }

    #[test]
    fn classifier_agrees_with_known_regions(a in 0.0f64..3.0, w in 0.0f64..3.0) {
        let b = a + w;
        let v = classify_bounds(SupportBounds::new(a, b).unwrap(), &TailCondition::Unknown).unwrap();
        if a == 0.0 || (E_NEG_E..=E_INV_E).contains(&b) || (a >= 1.0 && b <= E_INV_E) {
            prop_assert_eq!(v.outcome, Outcome::ConvergesAS);
        }
        if a > E_INV_E {
            prop_assert_eq!(v.outcome, Outcome::DivergesToInfinityAS);
        }
        if b < E_NEG_E && a > 0.0 && a < g_boundary(b).unwrap() {
            prop_assert_eq!(v.outcome, Outcome::ConvergesAS);
        }
        if b < E_NEG_E && a > g_boundary(b).unwrap() {
            prop_assert_eq!(v.outcome, Outcome::DivergesByOscillation);
        }
    }

    #[test]
    fn inverse_tower_cdf_is_a_cdf(alpha in 0.0f64..0.99, beta in 1.01f64..4.0, frac in 0.0f64..=1.0) {
        let p = InvTowerParams::new(alpha, beta, 0.0);
        let r = p.r_bound() * frac;
        let params = InvTowerParams::new(alpha, beta, r);
        let f = InvTowerCdf::new(params).unwrap();
        let (lo, hi) = params.support();
        let mut prev = 0.0;
        for i in 0..=200 {
            let x = lo + (hi - lo) * (i as f64 / 200.0);
            let v = f.eval(x);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev - 1e-12, "F decreases at {}", x);
            prev = v;
        }
    }

    #[test]
    fn inverse_sampling_inverts(u in 0.001f64..0.999) {
        let f = InvTowerCdf::new(InvTowerParams::new(0.5, 2.0, 0.3)).unwrap();
        let x = f.inv_sample(u).unwrap();
        prop_assert!(f.eval(x) >= u - 1e-9);
        prop_assert!(f.eval(x - 1e-6) <= u + 1e-9);
    }

    #[test]
    fn ecdf_counts(xs in prop::collection::vec(-10.0f64..10.0, 1..200), t in -12.0f64..12.0) {
        let e = EmpiricalCdf::new(&xs);
        let want = xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64;
        prop_assert_eq!(e.eval(t), want);
    }

    #[test]
    fn ks_fast_equals_brute(xs in prop::collection::vec(0.0f64..1.0, 8..150), ys in prop::collection::vec(0.0f64..1.0, 8..150)) {
        let one = ks_one_sample(&xs, |x| x).unwrap();
        prop_assert!((one.statistic - ks_brute_one(&xs, |x| x)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&one.p_value));
        let two = ks_two_sample(&xs, &ys).unwrap();
        prop_assert!((two.statistic - ks_brute_two(&xs, &ys)).abs() < 1e-12);
    }

    #[test]
    fn forward_and_backward_agree_on_fixed_draws(vals in prop::collection::vec(0.05f64..1.4, 1..25)) {
        let draws: Vec<Draw> = vals.iter().map(|&v| Draw::Real(v)).collect();
        let fwd = tower_forward_draws(&draws);
        for k in 1..=draws.len() {
            let rev: Vec<Draw> = draws[..k].iter().rev().copied().collect();
            let back = tower_backward_draws(&rev);
            prop_assert_eq!(fwd[k - 1].value, back.value);
        }
    }

    #[test]
    fn log_star_monotone(x in 0.0f64..1e300, y in 0.0f64..1e300) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(log_star_f64(lo) <= log_star_f64(hi));
    }
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let dist = DistributionSpec::ProductUniform {};
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| backward_samples(&dist, 30, 500, 99))
    };
    let (a, b) = (run(1), run(4));
    assert!(a.iter().zip(&b).all(|(x, y)| x.value == y.value));
}
