//! Almost-sure convergence verdicts for random power towers from the
//! support bounds of the base law, plus the stopping-time series that
//! settles the `a = 1` boundary case.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::DistributionSpec;
use crate::xfun::{g_boundary, tetrate, E_INV_E, E_NEG_E};

/// `a = inf supp(A)`, `b = sup supp(A)`; `b` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBounds {
    pub a: f64,
    pub b: f64,
}

impl SupportBounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let sb = SupportBounds { a, b };
        sb.validate()?;
        Ok(sb)
    }

    pub fn validate(&self) -> Result<()> {
        let SupportBounds { a, b } = *self;
        if a.is_nan() || b.is_nan() {
            return Err(Error::InvalidBounds("NaN bound".into()));
        }
        if a < 0.0 || !a.is_finite() {
            return Err(Error::InvalidBounds(format!("a = {a} must be finite and >= 0")));
        }
        if b <= 0.0 {
            return Err(Error::InvalidBounds(format!("b = {b} must be > 0")));
        }
        if a > b {
            return Err(Error::InvalidBounds(format!("a = {a} exceeds b = {b}")));
        }
        Ok(())
    }
}

/// A sequence `q(1), q(2), …` of probabilities.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailSeq {
    /// `q(n) = n^(-exponent)`
    Power { exponent: f64 },
    /// `q(n) = ratio^n`
    Geometric { ratio: f64 },
    Constant { value: f64 },
    /// `q(n) = values[n-1]`, repeating the last entry past the end.
    Table { values: Vec<f64> },
    /// `q(n) = inner(n + by)`
    Shifted { inner: Box<TailSeq>, by: u64 },
    #[serde(skip)]
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl TailSeq {
    pub fn custom<F: Fn(u64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        TailSeq::Custom(Arc::new(f))
    }

    /// `q(n)` for `n >= 1`.
    pub fn at(&self, n: u64) -> f64 {
        match self {
            TailSeq::Power { exponent } => (n as f64).powf(-exponent),
            TailSeq::Geometric { ratio } => ratio.powf(n as f64),
            TailSeq::Constant { value } => *value,
            TailSeq::Table { values } => {
                if values.is_empty() {
                    0.0
                } else {
                    values[(n.max(1) as usize - 1).min(values.len() - 1)]
                }
            }
            TailSeq::Shifted { inner, by } => inner.at(n + by),
            TailSeq::Custom(f) => f(n),
        }
    }

    /// Checks range and monotonicity on the first `n_check` terms.
    pub fn validate(&self, n_check: u64) -> Result<()> {
        let mut prev = f64::INFINITY;
        for n in 1..=n_check {
            let q = self.at(n);
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidSpec(format!("q({n}) = {q} is not a probability")));
            }
            if q > prev {
                return Err(Error::InvalidSpec(format!("q is increasing at n = {n}")));
            }
            prev = q;
        }
        Ok(())
    }
}

impl fmt::Debug for TailSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailSeq::Power { exponent } => write!(f, "Power({exponent})"),
            TailSeq::Geometric { ratio } => write!(f, "Geometric({ratio})"),
            TailSeq::Constant { value } => write!(f, "Constant({value})"),
            TailSeq::Table { values } => write!(f, "Table({values:?})"),
            TailSeq::Shifted { inner, by } => write!(f, "Shifted({inner:?}, {by})"),
            TailSeq::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// What is known about the near-one tail of `A` when `a = 1`.
#[derive(Clone, Debug)]
pub enum TailCondition {
    Unknown,
    DeclaredFiniteLogStarMoment,
    DeclaredInfiniteFractionalMoment(f64),
    /// `q(n) = P(A <= e^{1/(e⋆n)})`
    TailSequence(TailSeq),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ConvergesAS,
    DivergesToInfinityAS,
    DivergesByOscillation,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "Cor-conv-1")]
    CorConv1,
    #[serde(rename = "Thm1-case1")]
    Thm1Case1,
    #[serde(rename = "Cor-conv-2")]
    CorConv2,
    #[serde(rename = "Cor-conv-3")]
    CorConv3,
    #[serde(rename = "Thm1-case3")]
    Thm1Case3,
    #[serde(rename = "Cor-div-1")]
    CorDiv1,
    #[serde(rename = "Thm1-case2")]
    Thm1Case2,
    #[serde(rename = "Cor-conv-5")]
    CorConv5,
    #[serde(rename = "Cor-div-3")]
    CorDiv3,
    #[serde(rename = "Open-unbounded")]
    OpenUnbounded,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::CorConv1 => "Cor-conv-1",
            Rule::Thm1Case1 => "Thm1-case1",
            Rule::CorConv2 => "Cor-conv-2",
            Rule::CorConv3 => "Cor-conv-3",
            Rule::Thm1Case3 => "Thm1-case3",
            Rule::CorDiv1 => "Cor-div-1",
            Rule::Thm1Case2 => "Thm1-case2",
            Rule::CorConv5 => "Cor-conv-5",
            Rule::CorDiv3 => "Cor-div-3",
            Rule::OpenUnbounded => "Open-unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub rule: Rule,
    pub detail: String,
}

impl Verdict {
    fn new(outcome: Outcome, rule: Rule, detail: impl Into<String>) -> Self {
        Verdict { outcome, rule, detail: detail.into() }
    }
}

/// Verdict from support bounds; the tail condition is consulted only when
/// `a = 1` and `e^{1/e} < b < inf`.
pub fn classify_bounds(sb: SupportBounds, tail: &TailCondition) -> Result<Verdict> {
    sb.validate()?;
    let SupportBounds { a, b } = sb;
    use Outcome::*;

    if a == 0.0 {
        return Ok(Verdict::new(ConvergesAS, Rule::CorConv1, "a = 0"));
    }
    if a >= 1.0 && b <= E_INV_E {
        return Ok(Verdict::new(ConvergesAS, Rule::Thm1Case1, format!("[{a}, {b}] within [1, e^(1/e)]")));
    }
    if (E_NEG_E..=E_INV_E).contains(&b) {
        return Ok(Verdict::new(ConvergesAS, Rule::CorConv2, format!("b = {b} within [e^-e, e^(1/e)]")));
    }
    if a < 1.0 && b >= 1.0 {
        return Ok(Verdict::new(ConvergesAS, Rule::CorConv3, format!("a = {a} < 1 <= b = {b}")));
    }
    if b < E_NEG_E {
        let g = g_boundary(b)?;
        let detail = format!("G(b) = {g:.12e}, a - G(b) = {:.6e}", a - g);
        return Ok(if a < g {
            Verdict::new(ConvergesAS, Rule::Thm1Case3, detail)
        } else {
            Verdict::new(DivergesByOscillation, Rule::Thm1Case3, detail)
        });
    }
    if a > 1.0 {
        return Ok(Verdict::new(DivergesToInfinityAS, Rule::CorDiv1, format!("a = {a} > 1, b = {b} > e^(1/e)")));
    }
    // a == 1, b > e^(1/e)
    if b.is_infinite() {
        return Ok(Verdict::new(Indeterminate, Rule::OpenUnbounded, "a = 1 with unbounded support"));
    }
    Ok(match tail {
        TailCondition::Unknown => Verdict::new(Indeterminate, Rule::Thm1Case2, "a = 1: tail condition unknown"),
        TailCondition::DeclaredFiniteLogStarMoment => {
            Verdict::new(DivergesToInfinityAS, Rule::CorDiv3, "declared E[log★(1/(A-1))] < inf")
        }
        TailCondition::DeclaredInfiniteFractionalMoment(alpha) => {
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Error::Domain(format!("moment order must lie in (0,1), got {alpha}")));
            }
            Verdict::new(ConvergesAS, Rule::CorConv5, format!("declared E[log★(1/(A-1))^{alpha}] = inf"))
        }
        TailCondition::TailSequence(q) => stopping_time_series(q, DEFAULT_SERIES_TERMS).verdict,
    })
}

pub const DEFAULT_SERIES_TERMS: usize = 1_000_000;
const WINDOW: usize = 1000;

#[derive(Clone, Debug)]
pub struct SeriesResult {
    /// `partial_sums[k-1] = sum_{i<=k} prod_{j<i} (1 - q(j))`
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
}

impl SeriesResult {
    /// The last partial sum, `E[min(N, len)]`.
    pub fn value(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    /// `E[min(N, cap)]`.
    pub fn censored_mean(&self, cap: usize) -> f64 {
        let k = cap.min(self.partial_sums.len());
        if k == 0 {
            0.0
        } else {
            self.partial_sums[k - 1]
        }
    }
}

/// Partial sums of `E[N] = sum_k prod_{j<k} (1 - q(j))` in log space.
pub fn stopping_time_series(q: &TailSeq, n_max: usize) -> SeriesResult {
    let n_max = n_max.max(1);
    let mut partial_sums = Vec::with_capacity(n_max.min(1 << 16));
    let mut terms: Vec<f64> = Vec::with_capacity(n_max.min(1 << 16));
    let mut qs: Vec<f64> = Vec::with_capacity(n_max.min(1 << 16));
    let mut log_prod = 0.0f64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;

    for k in 1..=n_max {
        let term = if log_prod == f64::NEG_INFINITY { 0.0 } else { log_prod.exp() };
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        partial_sums.push(sum + comp);
        terms.push(term);

        let qk = q.at(k as u64);
        qs.push(qk);
        log_prod += if qk >= 1.0 { f64::NEG_INFINITY } else { (-qk).ln_1p() };

        if term == 0.0 && log_prod == f64::NEG_INFINITY {
            let v = Verdict::new(
                Outcome::ConvergesAS,
                Rule::Thm1Case2,
                format!("q({k}) = 1 stops every path; E[N] = {}", sum + comp),
            );
            return SeriesResult { partial_sums, verdict: v };
        }
        if k < WINDOW {
            continue;
        }
        let window_exact: f64 = terms[k - WINDOW..].iter().sum();
        if window_exact < 1e-12 {
            let v = Verdict::new(
                Outcome::ConvergesAS,
                Rule::Thm1Case2,
                format!("partial sums stable to 1e-12 after {k} terms; E[N] = {:.12}", sum + comp),
            );
            return SeriesResult { partial_sums, verdict: v };
        }
        let recent = &qs[k - WINDOW..];
        if recent.iter().all(|&x| x == 0.0) || geometric_envelope(recent) {
            let tail_bound = match geometric_ratio(recent) {
                Some(r) => recent[WINDOW - 1] * r / (1.0 - r),
                None => 0.0,
            };
            let floor = (log_prod - tail_bound * 2.0).exp();
            let v = Verdict::new(
                Outcome::DivergesToInfinityAS,
                Rule::Thm1Case2,
                format!("sum q(j) converges (prod bounded below by {floor:.6e}); E[N] = inf"),
            );
            return SeriesResult { partial_sums, verdict: v };
        }
    }
    let v = Verdict::new(
        Outcome::Indeterminate,
        Rule::Thm1Case2,
        format!("no decision within {n_max} terms; partial sum {:.12}", sum + comp),
    );
    SeriesResult { partial_sums, verdict: v }
}

fn geometric_ratio(qs: &[f64]) -> Option<f64> {
    let mut worst = 0.0f64;
    for w in qs.windows(2) {
        if w[0] <= 0.0 {
            if w[1] > 0.0 {
                return None;
            }
            continue;
        }
        worst = worst.max(w[1] / w[0]);
    }
    Some(worst)
}

fn geometric_envelope(qs: &[f64]) -> bool {
    matches!(geometric_ratio(qs), Some(r) if r <= 0.99)
}

/// `q(n) = P(A <= e^{1/(e⋆n)})` for laws with `inf supp = 1`.
pub fn tail_sequence_for(dist: &DistributionSpec, n_max: usize) -> Result<TailSeq> {
    let table_len = n_max.clamp(1, 80);
    match dist {
        DistributionSpec::Uniform { lo, hi } if *lo == 1.0 && *hi > 1.0 => {
            let width = hi - 1.0;
            let values = (1..=table_len as u64)
                .map(|n| {
                    let t = tetrate(std::f64::consts::E, n);
                    if t.is_finite_f64() {
                        ((1.0 / t.to_f64()).exp_m1() / width).min(1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok(TailSeq::Table { values })
        }
        DistributionSpec::PointMasses { atoms } if atoms.iter().any(|&(v, _)| v == 1.0)
            && atoms.iter().all(|&(v, _)| v >= 1.0) =>
        {
            let atoms = atoms.clone();
            let values = (1..=table_len as u64)
                .map(|n| {
                    let thr = tetrate(std::f64::consts::E, n);
                    atoms
                        .iter()
                        .filter(|&&(v, _)| v == 1.0 || crate::xfun::LevelIndex::from_f64(1.0 / v.ln()) >= thr)
                        .map(|&(_, p)| p)
                        .sum::<f64>()
                        .min(1.0)
                })
                .collect();
            Ok(TailSeq::Table { values })
        }
        DistributionSpec::LogStarTail { q } => Ok(TailSeq::Shifted { inner: Box::new(q.clone()), by: 1 }),
        DistributionSpec::HeavyDemo {} => Ok(TailSeq::custom(|n| 0.5f64.powf(n.div_ceil(16) as f64))),
        other => Err(Error::UnsupportedDistribution(other.family_name().to_string())),
    }
}

/// Verdict for a distribution spec, using its analytic tail when `a = 1`.
pub fn classify_distribution(dist: &DistributionSpec) -> Result<Verdict> {
    let sb = dist.support();
    let cond = if sb.a == 1.0 {
        match tail_sequence_for(dist, 64) {
            Ok(q) => TailCondition::TailSequence(q),
            Err(Error::UnsupportedDistribution(_)) => TailCondition::Unknown,
            Err(e) => return Err(e),
        }
    } else {
        TailCondition::Unknown
    };
    classify_bounds(sb, &cond)
}
