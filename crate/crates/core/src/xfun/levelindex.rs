//! Extended-range nonnegative reals in level-index form.
//!
//! A [`LevelIndex`] stores `exp^level(mantissa)`. Anything that fits in a
//! finite `f64` lives at level 0 with the plain value as mantissa; larger
//! values are pushed up through logarithms until the mantissa lands in
//! `[1, e)`. Because `exp^2(e) < f64::MAX < exp^3(e)`, the first level used
//! above 0 is 3.
//!
//! [`XReal`] is the signed companion used for logarithms of level-index
//! values (which may be negative, or `-inf` for `ln 0`).

use std::cmp::Ordering;
use std::f64::consts::E;
use std::fmt;

/// Highest level a finite value may occupy; anything beyond becomes
/// [`LevelIndex::OVERFLOW`].
pub const DEFAULT_MAX_LEVEL: u32 = 64;

/// Largest `y` for which `exp(y)` is finite.
const EXP_LIMIT: f64 = 709.782_712_893_384;

const OVERFLOW_LEVEL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelIndex {
    level: u32,
    mantissa: f64,
}

impl LevelIndex {
    pub const ZERO: LevelIndex = LevelIndex { level: 0, mantissa: 0.0 };
    pub const ONE: LevelIndex = LevelIndex { level: 0, mantissa: 1.0 };
    /// Saturated value ordered above every finite value.
    pub const OVERFLOW: LevelIndex = LevelIndex { level: OVERFLOW_LEVEL, mantissa: f64::INFINITY };

    /// Wraps a nonnegative double. `+inf` maps to the overflow sentinel.
    ///
    /// Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LevelIndex requires a nonnegative value, got {x}");
        if x.is_infinite() {
            Self::OVERFLOW
        } else {
            LevelIndex { level: 0, mantissa: x }
        }
    }

    /// Builds `exp^level(mantissa)` and brings it to canonical form.
    pub fn from_parts(level: u32, mantissa: f64) -> Self {
        assert!(mantissa >= 0.0, "mantissa must be nonnegative, got {mantissa}");
        normalize(level, mantissa)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn is_overflow(&self) -> bool {
        self.level == OVERFLOW_LEVEL
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0 && self.mantissa == 0.0
    }

    /// Whether the value is representable as a finite double.
    pub fn is_finite_f64(&self) -> bool {
        self.level == 0
    }

    /// The value as a double; `+inf` when it does not fit.
    pub fn to_f64(&self) -> f64 {
        if self.level == 0 {
            self.mantissa
        } else {
            f64::INFINITY
        }
    }

    /// `exp(self)`.
    pub fn exp(&self) -> Self {
        match self.level {
            OVERFLOW_LEVEL => Self::OVERFLOW,
            0 => exp_of(self.mantissa),
            l if l >= DEFAULT_MAX_LEVEL => Self::OVERFLOW,
            l => LevelIndex { level: l + 1, mantissa: self.mantissa },
        }
    }

    /// `ln(self)` as a signed extended real.
    pub fn ln(&self) -> XReal {
        match self.level {
            OVERFLOW_LEVEL => XReal::INFINITY,
            0 if self.mantissa == 0.0 => XReal::NEG_INFINITY,
            0 => XReal::from_f64(self.mantissa.ln()),
            l => XReal::pos(normalize(l - 1, self.mantissa)),
        }
    }

    /// `self * other`.
    pub fn mul(&self, other: &LevelIndex) -> LevelIndex {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        if self.level == 0 && other.level == 0 {
            let p = self.mantissa * other.mantissa;
            if p.is_finite() {
                return LevelIndex::from_f64(p);
            }
        }
        self.ln().add(&other.ln()).exp()
    }

    /// `self / other`; tiny quotients underflow to zero.
    pub fn div(&self, other: &LevelIndex) -> LevelIndex {
        if self.is_zero() {
            return Self::ZERO;
        }
        if other.is_zero() {
            return Self::OVERFLOW;
        }
        if self.level == 0 && other.level == 0 {
            let q = self.mantissa / other.mantissa;
            if q.is_finite() {
                return LevelIndex::from_f64(q);
            }
        }
        if self.is_overflow() && other.is_overflow() {
            // Both saturated: the ratio is unknown, keep the larger reading.
            return Self::OVERFLOW;
        }
        self.ln().sub(&other.ln()).exp()
    }

    /// `self + other`.
    pub fn add(&self, other: &LevelIndex) -> LevelIndex {
        let (hi, lo) = if self >= other { (self, other) } else { (other, self) };
        if hi.level == 0 {
            let s = hi.mantissa + lo.mantissa;
            if s.is_finite() {
                return LevelIndex::from_f64(s);
            }
        }
        if hi.is_overflow() {
            return Self::OVERFLOW;
        }
        let ratio = log_ratio(hi, lo);
        match hi.ln() {
            XReal { neg: false, mag } if mag.level == 0 => exp_of(mag.mantissa + ratio.ln_1p()),
            _ => *hi,
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &LevelIndex) -> LevelIndex {
        let (hi, lo) = if self >= other { (self, other) } else { (other, self) };
        if hi.level == 0 {
            return LevelIndex::from_f64(hi.mantissa - lo.mantissa);
        }
        if hi.is_overflow() {
            return if lo.is_overflow() { Self::ZERO } else { Self::OVERFLOW };
        }
        let ratio = log_ratio(hi, lo);
        if ratio >= 1.0 {
            return Self::ZERO;
        }
        match hi.ln() {
            XReal { neg: false, mag } if mag.level == 0 => exp_of(mag.mantissa + (-ratio).ln_1p()),
            _ => *hi,
        }
    }
}

/// `lo / hi` for `hi >= lo` with `hi` beyond double range.
fn log_ratio(hi: &LevelIndex, lo: &LevelIndex) -> f64 {
    if lo.is_zero() {
        return 0.0;
    }
    if hi == lo {
        return 1.0;
    }
    match (hi.ln(), lo.ln()) {
        (XReal { neg: false, mag: h }, l) if h.level == 0 => match l.to_f64() {
            Some(lv) => (lv - h.mantissa).exp(),
            None => 0.0,
        },
        // Distinct values at level >= 4 differ by astronomically large factors.
        _ => 0.0,
    }
}

/// `exp(y)` for any double `y`, canonicalized.
pub fn exp_of(y: f64) -> LevelIndex {
    if y.is_nan() {
        panic!("exp_of(NaN)");
    }
    if y <= EXP_LIMIT {
        let v = y.exp();
        if v.is_finite() {
            return LevelIndex { level: 0, mantissa: v };
        }
    }
    if y.is_infinite() {
        return LevelIndex::OVERFLOW;
    }
    normalize(1, y)
}

fn normalize(mut level: u32, mut m: f64) -> LevelIndex {
    if level == OVERFLOW_LEVEL || m.is_infinite() {
        return LevelIndex::OVERFLOW;
    }
    if level == 0 {
        return LevelIndex { level: 0, mantissa: m };
    }
    while m >= E {
        m = m.ln().max(1.0);
        level += 1;
    }
    while m < 1.0 && level > 0 {
        m = m.exp();
        level -= 1;
    }
    if level == 0 {
        return LevelIndex { level: 0, mantissa: m };
    }
    // Drop to level 0 whenever the value still fits in a double.
    let mut v = m;
    let mut fits = true;
    for _ in 0..level {
        v = v.exp();
        if !v.is_finite() {
            fits = false;
            break;
        }
    }
    if fits {
        return LevelIndex { level: 0, mantissa: v };
    }
    if level > DEFAULT_MAX_LEVEL {
        return LevelIndex::OVERFLOW;
    }
    LevelIndex { level, mantissa: m }
}

impl Eq for LevelIndex {}

impl PartialOrd for LevelIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LevelIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .cmp(&other.level)
            .then_with(|| self.mantissa.total_cmp(&other.mantissa))
    }
}

impl fmt::Display for LevelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            0 => write!(f, "{}", self.mantissa),
            OVERFLOW_LEVEL => write!(f, "overflow"),
            l => write!(f, "exp^{}({})", l, self.mantissa),
        }
    }
}

impl From<f64> for LevelIndex {
    fn from(x: f64) -> Self {
        LevelIndex::from_f64(x)
    }
}

/// Signed extended real: sign plus a [`LevelIndex`] magnitude.
///
/// Magnitudes below the smallest double underflow to zero, so `XReal` is
/// only suitable for logarithm-scale quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XReal {
    neg: bool,
    mag: LevelIndex,
}

impl XReal {
    pub const ZERO: XReal = XReal { neg: false, mag: LevelIndex::ZERO };
    pub const INFINITY: XReal = XReal { neg: false, mag: LevelIndex::OVERFLOW };
    pub const NEG_INFINITY: XReal = XReal { neg: true, mag: LevelIndex::OVERFLOW };

    pub fn from_f64(x: f64) -> Self {
        XReal { neg: x < 0.0, mag: LevelIndex::from_f64(x.abs()) }
    }

    pub fn pos(mag: LevelIndex) -> Self {
        XReal { neg: false, mag }
    }

    pub fn neg(mag: LevelIndex) -> Self {
        XReal { neg: !mag.is_zero(), mag }
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn magnitude(&self) -> LevelIndex {
        self.mag
    }

    /// The value as a double when it fits.
    pub fn to_f64(&self) -> Option<f64> {
        if self.mag.level == 0 {
            Some(if self.neg { -self.mag.mantissa } else { self.mag.mantissa })
        } else {
            None
        }
    }

    pub fn negate(&self) -> Self {
        XReal { neg: !self.neg && !self.mag.is_zero(), mag: self.mag }
    }

    pub fn add(&self, other: &XReal) -> XReal {
        if let (Some(a), Some(b)) = (self.to_f64(), other.to_f64()) {
            let s = a + b;
            if s.is_finite() {
                return XReal::from_f64(s);
            }
        }
        if self.neg == other.neg {
            return XReal { neg: self.neg, mag: self.mag.add(&other.mag) };
        }
        let (big, small) = if self.mag >= other.mag { (self, other) } else { (other, self) };
        let mag = big.mag.abs_diff(&small.mag);
        XReal { neg: big.neg && !mag.is_zero(), mag }
    }

    pub fn sub(&self, other: &XReal) -> XReal {
        self.add(&other.negate())
    }

    /// `exp(self)`; large negative arguments underflow to zero.
    pub fn exp(&self) -> LevelIndex {
        if !self.neg {
            return self.mag.exp();
        }
        match self.to_f64() {
            Some(v) => LevelIndex::from_f64(v.exp()),
            None => LevelIndex::ZERO,
        }
    }
}
