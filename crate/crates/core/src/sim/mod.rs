//! Monte Carlo simulation of random power towers.

mod dist;
mod draw;
pub mod rng;

pub use dist::DistributionSpec;
pub use draw::{tetration_draw, Draw, Thresholds};
pub use rng::{path_rng, PathRng};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean_and_se, Summary};
use crate::xfun::LevelIndex;

/// Level at which a tower height counts toward the divergence flag.
pub const DIVERGENCE_LEVEL: u32 = 6;
/// Consecutive heights at or above [`DIVERGENCE_LEVEL`] that set the flag.
pub const DIVERGENCE_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerSample {
    pub value: LevelIndex,
    pub depth_used: usize,
    /// Set once the tower has been declared divergent; `value` is then the
    /// overflow sentinel.
    pub diverged: bool,
}

/// One draw of the base.
pub fn sample_a<R: Rng + ?Sized>(dist: &DistributionSpec, rng: &mut R) -> Draw {
    dist.sample(rng)
}

/// `A_1^(A_2^(…^A_n))` evaluated innermost first.
pub fn tower_value(draws: &[Draw]) -> LevelIndex {
    let mut t = LevelIndex::ONE;
    for d in draws.iter().rev() {
        t = d.pow(t);
    }
    t
}

struct DivergenceWatch {
    run: usize,
    tripped: bool,
}

impl DivergenceWatch {
    fn new() -> Self {
        DivergenceWatch { run: 0, tripped: false }
    }

    fn observe(&mut self, t: LevelIndex) -> bool {
        if t.is_overflow() {
            self.tripped = true;
        } else if t.level() >= DIVERGENCE_LEVEL {
            self.run += 1;
            if self.run >= DIVERGENCE_RUN {
                self.tripped = true;
            }
        } else {
            self.run = 0;
        }
        self.tripped
    }
}

fn diverged_sample(n: usize) -> TowerSample {
    TowerSample { value: LevelIndex::OVERFLOW, depth_used: n, diverged: true }
}

/// `T_1, …, T_n` along one fixed sequence of draws.
///
/// Each height is recomputed from the top, so the cost is quadratic in the
/// length. When every draw is the same real base the heights are built
/// incrementally instead, with identical results.
pub fn tower_forward_draws(draws: &[Draw]) -> Vec<TowerSample> {
    let mut out = Vec::with_capacity(draws.len());
    let mut watch = DivergenceWatch::new();
    let constant = draws.windows(2).all(|w| w[0] == w[1]);
    let mut prev = LevelIndex::ONE;
    for n in 1..=draws.len() {
        if watch.tripped {
            out.push(diverged_sample(n));
            continue;
        }
        let t = if constant {
            draws[0].pow(prev)
        } else {
            tower_value(&draws[..n])
        };
        prev = t;
        if watch.observe(t) {
            out.push(diverged_sample(n));
        } else {
            out.push(TowerSample { value: t, depth_used: n, diverged: false });
        }
    }
    out
}

/// One path: draws `A_1 … A_depth` and returns `T_1 … T_depth`.
pub fn tower_forward<R: Rng + ?Sized>(dist: &DistributionSpec, depth: usize, rng: &mut R) -> Vec<TowerSample> {
    let draws: Vec<Draw> = (0..depth).map(|_| dist.sample(rng)).collect();
    tower_forward_draws(&draws)
}

/// `S_k = A_k^{S_{k-1}}`, `S_0 = 1`, over the given draws.
pub fn tower_backward_draws(draws: &[Draw]) -> TowerSample {
    let mut s = LevelIndex::ONE;
    let mut watch = DivergenceWatch::new();
    for d in draws {
        s = d.pow(s);
        if watch.observe(s) {
            return diverged_sample(draws.len());
        }
    }
    TowerSample { value: s, depth_used: draws.len(), diverged: false }
}

/// One draw with the law of `T_depth`, in linear time.
pub fn tower_backward<R: Rng + ?Sized>(dist: &DistributionSpec, depth: usize, rng: &mut R) -> TowerSample {
    let mut s = LevelIndex::ONE;
    let mut watch = DivergenceWatch::new();
    for _ in 0..depth {
        s = dist.sample(rng).pow(s);
        if watch.observe(s) {
            return diverged_sample(depth);
        }
    }
    TowerSample { value: s, depth_used: depth, diverged: false }
}

/// Runs `f` on every path index in parallel, collecting in path order.
pub fn run_paths<T, F>(paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..paths as u64).into_par_iter().map(f).collect()
}

/// `T_depth` for each of `paths` independent paths (forward evaluation).
pub fn forward_finals(dist: &DistributionSpec, depth: usize, paths: usize, seed: u64) -> Vec<TowerSample> {
    run_paths(paths, |i| {
        let mut rng = path_rng(seed, i);
        *tower_forward(dist, depth, &mut rng).last().expect("depth >= 1")
    })
}

/// `paths` independent draws with the law of `T_depth` (backward chain).
pub fn backward_samples(dist: &DistributionSpec, depth: usize, paths: usize, seed: u64) -> Vec<TowerSample> {
    run_paths(paths, |i| tower_backward(dist, depth, &mut path_rng(seed, i)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    /// Height of the even term used, `2m`.
    pub even_height: usize,
    pub even_limit_est: f64,
    pub odd_limit_est: f64,
    pub gap: f64,
    pub per_path_gaps: Summary,
    pub paths: usize,
    #[serde(skip)]
    pub gaps: Vec<f64>,
}

/// `T_{2m} - T_{2m+1}` per path for the largest `2m + 1 <= depth`.
pub fn oscillation_gap(dist: &DistributionSpec, depth: usize, paths: usize, seed: u64) -> Result<OscillationReport> {
    let sb = dist.support();
    if sb.b > 1.0 {
        return Err(Error::Precondition(format!("oscillation gap needs sup supp <= 1, got {}", sb.b)));
    }
    if depth < 3 {
        return Err(Error::Precondition(format!("depth must be at least 3, got {depth}")));
    }
    if paths == 0 {
        return Err(Error::Precondition("need at least one path".into()));
    }
    let odd = if depth % 2 == 1 { depth } else { depth - 1 };
    let even = odd - 1;
    let pairs: Vec<(f64, f64)> = run_paths(paths, |i| {
        let mut rng = path_rng(seed, i);
        let draws: Vec<f64> = (0..depth).map(|_| dist.sample(&mut rng).to_f64()).collect();
        let eval = |n: usize| draws[..n].iter().rev().fold(1.0f64, |t, &a| a.powf(t));
        (eval(even), eval(odd))
    });
    let evens: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let odds: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let gaps: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (even_mean, _) = mean_and_se(&evens);
    let (odd_mean, _) = mean_and_se(&odds);
    Ok(OscillationReport {
        even_height: even,
        even_limit_est: even_mean,
        odd_limit_est: odd_mean,
        gap: even_mean - odd_mean,
        per_path_gaps: Summary::of(&gaps),
        paths,
        gaps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingEstimate {
    /// Estimate of `E[min(N, n_cap)]`.
    pub mean_censored: f64,
    pub std_error: f64,
    pub censored_fraction: f64,
    pub n_cap: usize,
    pub paths: usize,
}

/// Monte Carlo estimate of `E[min(N, n_cap)]` for
/// `N = inf{n : A_n <= e^{1/(e⋆n)}}`.
pub fn estimate_stopping_time(dist: &DistributionSpec, n_cap: usize, paths: usize, seed: u64) -> Result<StoppingEstimate> {
    let a = dist.support().a;
    if a != 1.0 {
        return Err(Error::Precondition(format!("stopping time needs inf supp = 1, got {a}")));
    }
    if n_cap == 0 || paths == 0 {
        return Err(Error::Precondition("n_cap and paths must be positive".into()));
    }
    let thresholds = Thresholds::new();
    let results: Vec<(usize, bool)> = run_paths(paths, |i| {
        let mut rng = path_rng(seed, i);
        for n in 1..=n_cap {
            if dist.sample(&mut rng).below_threshold(n as u64, &thresholds) {
                return (n, false);
            }
        }
        (n_cap, true)
    });
    let values: Vec<f64> = results.iter().map(|r| r.0 as f64).collect();
    let (mean, se) = mean_and_se(&values);
    let censored = results.iter().filter(|r| r.1).count();
    Ok(StoppingEstimate {
        mean_censored: mean,
        std_error: se,
        censored_fraction: censored as f64 / paths as f64,
        n_cap,
        paths,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogStarEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub depth: usize,
    pub paths: usize,
}

/// `8(1 + sqrt(1 - ln 2))/ln 2`.
pub fn heavy_demo_bound() -> f64 {
    let l2 = std::f64::consts::LN_2;
    8.0 * (1.0 + (1.0 - l2).sqrt()) / l2
}

/// Monte Carlo estimate of `E[log★ T_depth]` for the heavy-tailed demo law.
pub fn heavy_demo_logstar_bound(depth: usize, paths: usize, seed: u64) -> LogStarEstimate {
    let dist = DistributionSpec::HeavyDemo {};
    let values: Vec<f64> = run_paths(paths, |i| {
        let mut rng = path_rng(seed, i);
        let mut s = LevelIndex::ONE;
        let mut ls = 0;
        for _ in 0..depth {
            let a = dist.sample(&mut rng);
            ls = a.log_star_pow(s);
            s = a.pow(s);
        }
        ls as f64
    });
    let (mean, se) = mean_and_se(&values);
    LogStarEstimate { mean, std_error: se, depth, paths }
}
