use std::f64::consts::E;

use crate::xfun::{li_pow, log_star, tetrate, LevelIndex};

/// One draw of a tower base.
///
/// Bases beyond double range, and bases whose distance from 1 is below
/// double resolution, keep a symbolic form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Draw {
    Real(f64),
    /// A base larger than any double.
    Huge(LevelIndex),
    /// `exp(1 / inv_log)`; `log_star` caches `log★(inv_log)`.
    NearOne { inv_log: LevelIndex, log_star: u64 },
}

impl Draw {
    pub fn near_one(inv_log: LevelIndex) -> Self {
        Draw::NearOne { inv_log, log_star: log_star(inv_log) }
    }

    /// `self^exponent`.
    pub fn pow(&self, exponent: LevelIndex) -> LevelIndex {
        match *self {
            Draw::Real(v) => li_pow(v, exponent),
            Draw::Huge(v) => {
                if v.is_overflow() {
                    return if exponent.is_zero() { LevelIndex::ONE } else { LevelIndex::OVERFLOW };
                }
                exponent.mul(&v.ln().magnitude()).exp()
            }
            Draw::NearOne { inv_log, .. } => exponent.div(&inv_log).exp(),
        }
    }

    /// The base as a double; `+inf` for huge bases.
    pub fn to_f64(&self) -> f64 {
        match *self {
            Draw::Real(v) => v,
            Draw::Huge(_) => f64::INFINITY,
            Draw::NearOne { inv_log, .. } => {
                if inv_log.is_finite_f64() {
                    (1.0 / inv_log.to_f64()).exp()
                } else {
                    1.0
                }
            }
        }
    }

    /// `log★` of the base itself.
    pub fn log_star(&self) -> u64 {
        match *self {
            Draw::Real(v) => log_star(LevelIndex::from_f64(v)),
            Draw::Huge(v) => log_star(v),
            // 1 < exp(1/Y) < e for Y > 1
            Draw::NearOne { .. } => 1,
        }
    }

    /// `log★(self^s)`. Powers near 1 use `1 + log★(s ln A)`, which stays
    /// exact when the power itself rounds to 1.
    pub fn log_star_pow(&self, s: LevelIndex) -> u64 {
        if s.is_zero() {
            return 0;
        }
        let p = self.pow(s);
        if p >= LevelIndex::from_f64(2.0) {
            return log_star(p);
        }
        let z = match *self {
            Draw::Real(v) if v > 1.0 => LevelIndex::from_f64(v.ln()).mul(&s),
            Draw::Real(_) => return log_star(self.pow(s)),
            Draw::Huge(v) => v.ln().magnitude().mul(&s),
            Draw::NearOne { inv_log, .. } => s.div(&inv_log),
        };
        1 + log_star(z)
    }

    /// `log★(1 / ln A)` when `A > 1`; `None` for `A <= 1`.
    pub fn inv_log_star(&self) -> Option<(LevelIndex, u64)> {
        match *self {
            Draw::Real(v) if v <= 1.0 => None,
            Draw::Real(v) => {
                let y = LevelIndex::from_f64(1.0 / v.ln());
                Some((y, log_star(y)))
            }
            Draw::Huge(_) => Some((LevelIndex::ZERO, 0)),
            Draw::NearOne { inv_log, log_star } => Some((inv_log, log_star)),
        }
    }

    /// Whether `A <= e^{1/(e⋆n)}`, decided without forming `A - 1`.
    pub fn below_threshold(&self, n: u64, thresholds: &Thresholds) -> bool {
        match self.inv_log_star() {
            None => true,
            Some((y, _)) if y.is_overflow() => true,
            Some((y, l)) => {
                if l != n {
                    l > n
                } else {
                    y >= thresholds.get(n)
                }
            }
        }
    }
}

/// Cached `e⋆n`.
#[derive(Clone, Debug)]
pub struct Thresholds {
    table: Vec<LevelIndex>,
}

impl Thresholds {
    pub fn new() -> Self {
        let mut table = vec![LevelIndex::ONE];
        let mut t = LevelIndex::ONE;
        while !t.is_overflow() {
            t = li_pow(E, t);
            table.push(t);
        }
        Thresholds { table }
    }

    pub fn get(&self, n: u64) -> LevelIndex {
        self.table.get(n as usize).copied().unwrap_or(LevelIndex::OVERFLOW)
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::new()
    }
}

/// `e⋆n` as a draw.
pub fn tetration_draw(n: u64) -> Draw {
    let t = tetrate(E, n);
    if t.is_finite_f64() {
        Draw::Real(t.to_f64())
    } else {
        Draw::Huge(t)
    }
}
