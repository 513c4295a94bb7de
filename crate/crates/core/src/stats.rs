//! Empirical CDFs, Kolmogorov-Smirnov tests and Monte Carlo summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_KS_SAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Panics if a sample is NaN.
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        assert!(sorted.iter().all(|x| !x.is_nan()), "NaN sample");
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: f64,
}

/// Asymptotic Kolmogorov survival function `Q(lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        sum += sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_q(d * (s + 0.12 + 0.11 / s))
}

/// One-sample test of `samples` against a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_KS_SAMPLES, got: samples.len() });
    }
    let ecdf = EmpiricalCdf::new(samples);
    let n = ecdf.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in ecdf.sorted().iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / n;
        let lo = i as f64 / n;
        d = d.max((hi - f).abs()).max((lo - f).abs());
    }
    Ok(KsResult { statistic: d, p_value: p_value(d, n), n_effective: n })
}

/// Two-sample test; ties are merged before comparing the step functions.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    for s in [x, y] {
        if s.len() < MIN_KS_SAMPLES {
            return Err(Error::InsufficientSamples { needed: MIN_KS_SAMPLES, got: s.len() });
        }
    }
    let ex = EmpiricalCdf::new(x);
    let ey = EmpiricalCdf::new(y);
    let (xs, ys) = (ex.sorted(), ey.sorted());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let n_eff = n * m / (n + m);
    Ok(KsResult { statistic: d, p_value: p_value(d, n_eff), n_effective: n_eff })
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = neumaier_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let ss = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q95: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Summary {
            mean: if s.is_empty() { f64::NAN } else { neumaier_sum(s.iter().copied()) / s.len() as f64 },
            median: quantile_sorted(&s, 0.5),
            min: *s.first().unwrap_or(&f64::NAN),
            max: *s.last().unwrap_or(&f64::NAN),
            q05: quantile_sorted(&s, 0.05),
            q95: quantile_sorted(&s, 0.95),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_samples() {
        assert!(matches!(ks_one_sample(&[0.5], |x| x), Err(Error::InsufficientSamples { .. })));
        assert!(ks_two_sample(&[0.5; 3], &[0.5; 20]).is_err());
    }

    #[test]
    fn evenly_spaced_against_uniform() {
        let xs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let r = ks_one_sample(&xs, |x| x).unwrap();
        // largest gap: i/9 - x_i at i = 9 gives 1 - 0.9 = 0.1
        assert!((r.statistic - 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_sample_extremes() {
        let a = vec![0.3; 10];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = ks_two_sample(&[0.0; 10], &[1.0; 12]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn ecdf_is_right_continuous() {
        let e = EmpiricalCdf::new(&[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval(3.0), 1.0);
    }

    #[test]
    fn compensated_sum() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(neumaier_sum(v), 1.0);
    }
}
