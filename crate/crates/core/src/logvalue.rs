//! Nonnegative reals stored by their natural logarithm.
//!
//! Factorial weights such as `(n!)^R` leave the double-precision range long
//! before the ball radii we care about, so every weighted quantity is carried
//! as a log-magnitude. `Zero` is kept separate so that exact zeros survive.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

/// Log-weights whose magnitude exceeds this threshold switch summation from
/// plain floating-point accumulation to max-shifted log-sum-exp, so that
/// neither overflow nor underflow loses terms.
pub const LOG_SPACE_CROSSOVER: f64 = 600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ln")]
pub enum LogValue {
    Zero,
    Positive(f64),
}

impl LogValue {
    pub const ONE: LogValue = LogValue::Positive(0.0);

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && !x.is_nan(), "LogValue::from_f64 called with {x}");
        if x == 0.0 {
            LogValue::Zero
        } else {
            LogValue::Positive(x.ln())
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan(), "LogValue::from_ln called with NaN");
        if ln == f64::NEG_INFINITY {
            LogValue::Zero
        } else {
            LogValue::Positive(ln)
        }
    }

    /// Natural logarithm; `-inf` for zero.
    pub fn ln(self) -> f64 {
        match self {
            LogValue::Zero => f64::NEG_INFINITY,
            LogValue::Positive(l) => l,
        }
    }

    /// Plain value. Overflows to `inf` for huge magnitudes.
    pub fn to_f64(self) -> f64 {
        match self {
            LogValue::Zero => 0.0,
            LogValue::Positive(l) => l.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, LogValue::Zero)
    }

    pub fn powf(self, p: f64) -> Self {
        match self {
            LogValue::Positive(l) => LogValue::from_ln(l * p),
            LogValue::Zero if p > 0.0 => LogValue::Zero,
            LogValue::Zero if p == 0.0 => LogValue::ONE,
            LogValue::Zero => LogValue::Positive(f64::INFINITY),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Sum of values given by their logarithms (`-inf` entries are zeros).
    pub fn sum_ln<I: IntoIterator<Item = f64>>(logs: I) -> Self {
        let logs: Vec<f64> = logs.into_iter().collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogValue::Zero;
        }
        if max == f64::INFINITY {
            return LogValue::Positive(f64::INFINITY);
        }
        if max.abs() <= LOG_SPACE_CROSSOVER {
            let total: f64 = logs.iter().map(|l| l.exp()).sum();
            LogValue::from_f64(total)
        } else {
            let shifted: f64 = logs.iter().map(|l| (l - max).exp()).sum();
            LogValue::Positive(max + shifted.ln())
        }
    }

    pub fn sum<I: IntoIterator<Item = LogValue>>(values: I) -> Self {
        Self::sum_ln(values.into_iter().map(LogValue::ln))
    }

    /// `|self / other - 1|`, the relative difference of the two values.
    pub fn rel_diff(self, other: Self) -> f64 {
        match (self, other) {
            (LogValue::Zero, LogValue::Zero) => 0.0,
            (LogValue::Zero, _) | (_, LogValue::Zero) => 1.0,
            (LogValue::Positive(a), LogValue::Positive(b)) => {
                if a == b {
                    0.0
                } else {
                    (a - b).exp_m1().abs()
                }
            }
        }
    }

    /// `self <= other * (1 + rel_tol)`.
    pub fn le_within(self, other: Self, rel_tol: f64) -> bool {
        match (self, other) {
            (LogValue::Zero, _) => true,
            (_, LogValue::Zero) => false,
            (LogValue::Positive(a), LogValue::Positive(b)) => a <= b + rel_tol.ln_1p(),
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        match (self, rhs) {
            (LogValue::Zero, _) | (_, LogValue::Zero) => LogValue::Zero,
            (LogValue::Positive(a), LogValue::Positive(b)) => LogValue::Positive(a + b),
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;

    fn div(self, rhs: LogValue) -> LogValue {
        match (self, rhs) {
            (LogValue::Zero, _) => LogValue::Zero,
            (_, LogValue::Zero) => LogValue::Positive(f64::INFINITY),
            (LogValue::Positive(a), LogValue::Positive(b)) => LogValue::Positive(a - b),
        }
    }
}

impl std::ops::Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        match (self, rhs) {
            (LogValue::Zero, x) | (x, LogValue::Zero) => x,
            (LogValue::Positive(a), LogValue::Positive(b)) => {
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                if hi == f64::INFINITY {
                    return LogValue::Positive(hi);
                }
                LogValue::Positive(hi + (lo - hi).exp().ln_1p())
            }
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln().partial_cmp(&other.ln())
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Zero => write!(f, "0"),
            LogValue::Positive(l) if l.abs() < 700.0 => write!(f, "{}", l.exp()),
            LogValue::Positive(l) => write!(f, "exp({l})"),
        }
    }
}
