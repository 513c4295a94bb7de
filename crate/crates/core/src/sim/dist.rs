use std::f64::consts::E;

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::draw::{tetration_draw, Draw};
use crate::classify::{SupportBounds, TailSeq};
use crate::error::{Error, Result};
use crate::invtower::{example2_cdf, example2_sampler, InvTowerCdf, InvTowerParams};
use crate::xfun::{tetrate, LevelIndex};

/// Law of a tower base, read from `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    /// `(value, probability)` pairs.
    PointMasses { atoms: Vec<(f64, f64)> },
    /// `U V` with `U, V ~ Unif(0,1)`.
    ProductUniform {},
    /// `max(V1^{r/(1-r)}, V2 V3)`.
    MaxExample2 { r: f64 },
    /// Inverse tower law of `U^r`, `U ~ Unif[alpha, beta]`.
    InverseTower { alpha: f64, beta: f64, r: f64 },
    /// `P(log★(1/ln A) >= n) = q(n)`; see [`DistributionSpec::sample`].
    LogStarTail { q: TailSeq },
    /// `e⋆n` and `e^{1/(e⋆16n)}`, each with probability `2^{-(n+1)}`.
    HeavyDemo {},
}

/// Bands beyond this are treated as `A = 1` exactly.
const MAX_BAND: u64 = 1 << 40;

impl DistributionSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: DistributionSpec =
            serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn point_mass(v: f64) -> Self {
        DistributionSpec::PointMasses { atoms: vec![(v, 1.0)] }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::PointMasses { .. } => "point_masses",
            DistributionSpec::ProductUniform {} => "product_uniform",
            DistributionSpec::MaxExample2 { .. } => "max_example2",
            DistributionSpec::InverseTower { .. } => "inverse_tower",
            DistributionSpec::LogStarTail { .. } => "log_star_tail",
            DistributionSpec::HeavyDemo {} => "heavy_demo",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return bad(format!("uniform needs 0 <= lo < hi finite, got [{lo}, {hi}]"));
                }
            }
            DistributionSpec::PointMasses { atoms } => {
                if atoms.is_empty() {
                    return bad("point_masses needs at least one atom".into());
                }
                for &(v, p) in atoms {
                    if !(v.is_finite() && v > 0.0) {
                        return bad(format!("atom value {v} must be finite and > 0"));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return bad(format!("atom probability {p} outside [0,1]"));
                    }
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("atom probabilities sum to {total}"));
                }
            }
            DistributionSpec::ProductUniform {} | DistributionSpec::HeavyDemo {} => {}
            DistributionSpec::MaxExample2 { r } => {
                if !(*r > 0.0 && *r < 1.0) {
                    return bad(format!("max_example2 needs r in (0,1), got {r}"));
                }
            }
            DistributionSpec::InverseTower { alpha, beta, r } => {
                let f = InvTowerParams::new(*alpha, *beta, *r).feasibility();
                if !f.feasible {
                    return bad(format!("inverse_tower: {}", f.reason));
                }
            }
            DistributionSpec::LogStarTail { q } => {
                if q.at(1) > 1.0 || q.at(1) < 0.0 {
                    return bad("log_star_tail: q(1) must be a probability".into());
                }
                q.validate(256)?;
            }
        }
        Ok(())
    }

    /// `(inf supp, sup supp)`.
    pub fn support(&self) -> SupportBounds {
        let (a, b) = match self {
            DistributionSpec::Uniform { lo, hi } => (*lo, *hi),
            DistributionSpec::PointMasses { atoms } => {
                let live = atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0);
                let lo = live.clone().fold(f64::INFINITY, f64::min);
                let hi = live.fold(0.0, f64::max);
                (lo, hi)
            }
            DistributionSpec::ProductUniform {} | DistributionSpec::MaxExample2 { .. } => (0.0, 1.0),
            DistributionSpec::InverseTower { alpha, beta, r } => InvTowerParams::new(*alpha, *beta, *r).support(),
            DistributionSpec::LogStarTail { q } => {
                let lo = match (1..=64u64).rev().find(|&n| q.at(n) > 0.0) {
                    Some(64) => 1.0,
                    Some(n) => {
                        let y = tetrate(E, n);
                        if y.is_finite_f64() {
                            (1.0 / y.to_f64()).exp()
                        } else {
                            1.0
                        }
                    }
                    None => E,
                };
                (lo, E)
            }
            DistributionSpec::HeavyDemo {} => (1.0, f64::INFINITY),
        };
        SupportBounds { a, b }
    }

    /// Analytic CDF where one exists.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match self {
            DistributionSpec::Uniform { lo, hi } => Some(((x - lo) / (hi - lo)).clamp(0.0, 1.0)),
            DistributionSpec::PointMasses { atoms } => {
                Some(atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum::<f64>().min(1.0))
            }
            DistributionSpec::ProductUniform {} => Some(if x <= 0.0 {
                0.0
            } else if x >= 1.0 {
                1.0
            } else {
                x * (1.0 - x.ln())
            }),
            DistributionSpec::MaxExample2 { r } => Some(example2_cdf(*r, x)),
            DistributionSpec::InverseTower { alpha, beta, r } => {
                Some(InvTowerCdf::unchecked(InvTowerParams::new(*alpha, *beta, *r)).eval(x))
            }
            DistributionSpec::LogStarTail { .. } | DistributionSpec::HeavyDemo {} => None,
        }
    }

    /// CDF of the tower limit when it is known in closed form.
    pub fn tower_law_cdf(&self, x: f64) -> Option<f64> {
        match self {
            DistributionSpec::ProductUniform {} => Some(x.clamp(0.0, 1.0)),
            DistributionSpec::MaxExample2 { r } => Some(if x <= 0.0 { 0.0 } else { x.powf(1.0 / r).min(1.0) }),
            DistributionSpec::InverseTower { alpha, beta, r } => {
                Some(InvTowerParams::new(*alpha, *beta, *r).target_cdf(x))
            }
            _ => None,
        }
    }

    /// One draw of the base.
    ///
    /// For `LogStarTail`, a band `L` is drawn with `P(L >= n) = q(n)`. Band 0
    /// is the atom `A = e`; band `L >= 1` gives `A = exp(1/Y)` with
    /// `Y = exp^{L-1}(u)`, `u ~ Unif(1, e]`, so that `log★(Y) = L`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        match self {
            DistributionSpec::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                Draw::Real(lo + (hi - lo) * u)
            }
            DistributionSpec::PointMasses { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return Draw::Real(v);
                    }
                }
                Draw::Real(atoms.iter().rev().find(|a| a.1 > 0.0).map_or(atoms[0].0, |a| a.0))
            }
            DistributionSpec::ProductUniform {} => {
                let u: f64 = rng.sample(Open01);
                let v: f64 = rng.sample(Open01);
                Draw::Real(u * v)
            }
            DistributionSpec::MaxExample2 { r } => Draw::Real(example2_sampler(*r, rng).expect("validated r")),
            DistributionSpec::InverseTower { alpha, beta, r } => {
                let f = InvTowerCdf::unchecked(InvTowerParams::new(*alpha, *beta, *r));
                Draw::Real(f.sample(rng).expect("validated parameters"))
            }
            DistributionSpec::LogStarTail { q } => {
                let u: f64 = rng.sample(Open01);
                match log_star_band(q, u) {
                    None => Draw::Real(1.0),
                    Some(0) => Draw::Real(E),
                    Some(band) => {
                        let w: f64 = rng.sample(Open01);
                        let m = 1.0 + (E - 1.0) * w;
                        let y = LevelIndex::from_parts((band - 1).min(65) as u32, m);
                        Draw::NearOne { inv_log: y, log_star: band }
                    }
                }
            }
            DistributionSpec::HeavyDemo {} => {
                let heads: bool = rng.random();
                let mut n = 1u64;
                while rng.random::<bool>() {
                    n += 1;
                }
                if heads {
                    tetration_draw(n)
                } else {
                    Draw::NearOne { inv_log: tetrate(E, 16 * n), log_star: 16 * n }
                }
            }
        }
    }
}

/// `max{n >= 0 : q(n) >= u}` with `q(0) = 1`; `None` when unbounded.
fn log_star_band(q: &TailSeq, u: f64) -> Option<u64> {
    if q.at(1) < u {
        return Some(0);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while q.at(hi) >= u {
        lo = hi;
        hi *= 2;
        if hi > MAX_BAND {
            return None;
        }
    }
    // q(lo) >= u > q(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if q.at(mid) >= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::path_rng;

    #[test]
    fn json_forms() {
        let d = DistributionSpec::from_json(r#"{"family":"uniform","params":{"lo":1,"hi":2}}"#).unwrap();
        assert_eq!(d.support(), SupportBounds { a: 1.0, b: 2.0 });
        let d = DistributionSpec::from_json(r#"{"family":"product_uniform","params":{}}"#).unwrap();
        assert_eq!(d.family_name(), "product_uniform");
        let d = DistributionSpec::from_json(
            r#"{"family":"log_star_tail","params":{"q":{"kind":"power","exponent":0.5}}}"#,
        )
        .unwrap();
        assert_eq!(d.support().a, 1.0);
        assert!(DistributionSpec::from_json(r#"{"family":"point_masses","params":{"atoms":[[0,1]]}}"#).is_err());
        assert!(DistributionSpec::from_json(r#"{"family":"point_masses","params":{"atoms":[[2,0.5]]}}"#).is_err());
        assert!(DistributionSpec::from_json(r#"{"family":"nope","params":{}}"#).is_err());
    }

    #[test]
    fn point_mass_draw() {
        let mut rng = path_rng(1, 0);
        assert_eq!(DistributionSpec::point_mass(2.0).sample(&mut rng), Draw::Real(2.0));
    }

    #[test]
    fn bands_follow_q() {
        let q = TailSeq::Power { exponent: 0.5 };
        assert_eq!(log_star_band(&q, 0.6), Some(2));
        assert_eq!(log_star_band(&q, 1.0), Some(1));
        assert_eq!(log_star_band(&TailSeq::Constant { value: 1.0 }, 0.3), None);
        assert_eq!(log_star_band(&TailSeq::Constant { value: 0.2 }, 0.3), Some(0));
    }
}
