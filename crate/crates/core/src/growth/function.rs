use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::ln_gamma;

use crate::{Error, LogValue, Result};

/// A growth function `σ: N₀ → [1, ∞)` from the catalog, evaluated in log-space.
#[derive(Clone, Debug, PartialEq)]
pub enum GrowthFunction {
    /// Descending coefficients `a_d, …, a_1, 1`.
    Polynomial(Vec<f64>),
    /// `exp(n^θ)`.
    SubExponential(f64),
    /// `n!`.
    Factorial,
    /// `Γ(n^θ + 1)`.
    SubFactorial(f64),
    /// `σ^d`.
    Power(Box<GrowthFunction>, f64),
    /// `σ·τ`.
    Product(Box<GrowthFunction>, Box<GrowthFunction>),
    /// `x·σ + y·τ`.
    ScaledSum(f64, Box<GrowthFunction>, f64, Box<GrowthFunction>),
}

/// Anything that can be read as `ln σ(n)`. Sampled functions return `None`
/// outside their tabulated range.
pub trait LogGrowth {
    fn ln_at(&self, n: u64) -> Option<f64>;
    fn label(&self) -> String;
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

impl GrowthFunction {
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let f = GrowthFunction::Polynomial(coefficients);
        f.validate()?;
        Ok(f.normalized())
    }

    pub fn linear() -> Self {
        GrowthFunction::Polynomial(vec![1.0, 1.0])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let unit_interval = |t: f64| t > 0.0 && t <= 1.0;
        match self {
            GrowthFunction::Polynomial(c) => {
                if c.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return bad(format!("polynomial coefficients must be finite and nonnegative: {c:?}"));
                }
                if c.last() != Some(&1.0) {
                    return bad(format!("polynomial constant term must be 1: {c:?}"));
                }
                if c.iter().rev().skip(1).all(|x| *x == 0.0) {
                    return bad("polynomial must have positive degree to be unbounded".into());
                }
                Ok(())
            }
            GrowthFunction::SubExponential(t) | GrowthFunction::SubFactorial(t) if !unit_interval(*t) => {
                bad(format!("exponent θ must lie in (0, 1], got {t}"))
            }
            GrowthFunction::SubExponential(_) | GrowthFunction::SubFactorial(_) | GrowthFunction::Factorial => Ok(()),
            GrowthFunction::Power(f, d) => {
                if !(d.is_finite() && *d > 0.0) {
                    return bad(format!("power exponent must be positive, got {d}"));
                }
                f.validate()
            }
            GrowthFunction::Product(f, g) => {
                f.validate()?;
                g.validate()
            }
            GrowthFunction::ScaledSum(x, f, y, g) => {
                if !(x.is_finite() && *x >= 1.0 && y.is_finite() && *y >= 1.0) {
                    return bad(format!("sum weights must be at least 1, got {x} and {y}"));
                }
                f.validate()?;
                g.validate()
            }
        }
    }

    fn normalized(self) -> Self {
        match self {
            GrowthFunction::Polynomial(c) => {
                let first = c.iter().position(|x| *x != 0.0).unwrap_or(c.len() - 1);
                GrowthFunction::Polynomial(c[first..].to_vec())
            }
            GrowthFunction::Power(f, d) => GrowthFunction::Power(Box::new(f.normalized()), d),
            GrowthFunction::Product(f, g) => GrowthFunction::Product(Box::new(f.normalized()), Box::new(g.normalized())),
            GrowthFunction::ScaledSum(x, f, y, g) => {
                GrowthFunction::ScaledSum(x, Box::new(f.normalized()), y, Box::new(g.normalized()))
            }
            other => other,
        }
    }

    /// `ln σ(n)`, always `>= 0`.
    pub fn ln_value(&self, n: u64) -> f64 {
        let x = n as f64;
        match self {
            GrowthFunction::Polynomial(c) => {
                if n == 0 {
                    return 0.0;
                }
                let d = c.len() - 1;
                c.iter()
                    .enumerate()
                    .filter(|(_, a)| **a > 0.0)
                    .map(|(i, a)| a.ln() + (d - i) as f64 * x.ln())
                    .fold(f64::NEG_INFINITY, log_add)
            }
            GrowthFunction::SubExponential(t) => x.powf(*t),
            GrowthFunction::Factorial => {
                if n <= 1 {
                    0.0
                } else {
                    ln_gamma(x + 1.0)
                }
            }
            GrowthFunction::SubFactorial(t) => subfactorial_ln(n, *t),
            GrowthFunction::Power(f, d) => d * f.ln_value(n),
            GrowthFunction::Product(f, g) => f.ln_value(n) + g.ln_value(n),
            GrowthFunction::ScaledSum(a, f, b, g) => log_add(a.ln() + f.ln_value(n), b.ln() + g.ln_value(n)),
        }
    }

    pub fn eval_log(&self, n: u64) -> LogValue {
        LogValue::from_ln(self.ln_value(n))
    }

    /// `ln σ(n)` for `n = 0..=n_max`.
    pub fn ln_table(&self, n_max: u64) -> Vec<f64> {
        (0..=n_max).map(|n| self.ln_value(n)).collect()
    }
}

/// `ln Γ(n^θ + 1)`, clamped against the previous value. For integer `n >= 1`
/// the argument is at least 2, where `Γ` increases, so one step back suffices.
fn subfactorial_ln(n: u64, theta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let raw = ln_gamma((n as f64).powf(theta) + 1.0);
    let prev = if n == 1 { 0.0 } else { ln_gamma(((n - 1) as f64).powf(theta) + 1.0).max(0.0) };
    if raw < prev {
        log::debug!("subfact({theta}) clamped at n={n}: {raw} < {prev}");
        prev
    } else {
        raw
    }
}

impl LogGrowth for GrowthFunction {
    fn ln_at(&self, n: u64) -> Option<f64> {
        Some(self.ln_value(n))
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthFunction::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "poly({})", parts.join(","))
            }
            GrowthFunction::SubExponential(t) => write!(f, "subexp({t})"),
            GrowthFunction::Factorial => write!(f, "factorial"),
            GrowthFunction::SubFactorial(t) => write!(f, "subfact({t})"),
            GrowthFunction::Power(g, d) => write!(f, "pow({g},{d})"),
            GrowthFunction::Product(g, h) => write!(f, "prod({g},{h})"),
            GrowthFunction::ScaledSum(x, g, y, h) => write!(f, "sum({x},{g},{y},{h})"),
        }
    }
}

impl FromStr for GrowthFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let f = p.function()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input"));
        }
        f.validate()?;
        Ok(f.normalized())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("growth function {:?} at offset {}: {what}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{ch}'")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        let len: usize = self.src[start..].chars().take_while(|c| pred(*c)).map(char::len_utf8).sum();
        self.pos += len;
        &self.src[start..start + len]
    }

    fn number(&mut self) -> Result<f64> {
        let tok = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        tok.parse::<f64>().map_err(|_| self.error("expected a number"))
    }

    fn function(&mut self) -> Result<GrowthFunction> {
        let name = self.take_while(|c| c.is_ascii_alphabetic()).to_ascii_lowercase();
        let f = match name.as_str() {
            "factorial" => GrowthFunction::Factorial,
            "linear" => GrowthFunction::linear(),
            "poly" => {
                self.expect('(')?;
                let mut coeffs = vec![self.number()?];
                loop {
                    self.skip_ws();
                    if self.src[self.pos..].starts_with(')') {
                        self.pos += 1;
                        break;
                    }
                    self.expect(',')?;
                    coeffs.push(self.number()?);
                }
                GrowthFunction::Polynomial(coeffs)
            }
            "subexp" | "subfact" => {
                self.expect('(')?;
                let t = self.number()?;
                self.expect(')')?;
                if name == "subexp" {
                    GrowthFunction::SubExponential(t)
                } else {
                    GrowthFunction::SubFactorial(t)
                }
            }
            "pow" => {
                self.expect('(')?;
                let base = self.function()?;
                self.expect(',')?;
                let d = self.number()?;
                self.expect(')')?;
                GrowthFunction::Power(Box::new(base), d)
            }
            "prod" => {
                self.expect('(')?;
                let a = self.function()?;
                self.expect(',')?;
                let b = self.function()?;
                self.expect(')')?;
                GrowthFunction::Product(Box::new(a), Box::new(b))
            }
            "sum" => {
                self.expect('(')?;
                let x = self.number()?;
                self.expect(',')?;
                let a = self.function()?;
                self.expect(',')?;
                let y = self.number()?;
                self.expect(',')?;
                let b = self.function()?;
                self.expect(')')?;
                GrowthFunction::ScaledSum(x, Box::new(a), y, Box::new(b))
            }
            "" => return Err(self.error("expected a growth function name")),
            other => return Err(self.error(&format!("unknown growth function '{other}'"))),
        };
        Ok(f)
    }
}

impl Serialize for GrowthFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GrowthFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> GrowthFunction {
        s.parse().unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(g("poly(1,1)").ln_value(0), 0.0);
        assert!((g("poly(1,1)").ln_value(4) - 5f64.ln()).abs() < 1e-15);
        assert!((g("factorial").ln_value(5) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(g("subexp(1)").ln_value(3), 3.0);
        assert!((g("subfact(0.5)").ln_value(9) - 6f64.ln()).abs() < 1e-12);
        assert!((g("pow(poly(1,1),3)").ln_value(1) - 3.0 * 2f64.ln()).abs() < 1e-15);
        assert!((g("prod(poly(1,1),subexp(1))").ln_value(2) - (3f64.ln() + 2.0)).abs() < 1e-15);
        let s = g("sum(2,poly(1,1),3,factorial)").ln_value(3);
        assert!((s - (2.0 * 4.0 + 3.0 * 6.0f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn polynomial_is_trimmed() {
        assert_eq!(g("poly(0,3,0,1)"), GrowthFunction::Polynomial(vec![3.0, 0.0, 1.0]));
        assert!((g("poly(0,3,0,1)").ln_value(2) - 13f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        for s in ["poly(1,2)", "poly(1)", "poly(0,1)", "subexp(0)", "subexp(1.5)", "pow(factorial,0)", "sum(0.5,factorial,1,factorial)", "nope", "factorial x", "poly(1,"] {
            assert!(s.parse::<GrowthFunction>().is_err(), "{s} should not parse");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["poly(3,0,1)", "subexp(0.5)", "factorial", "subfact(0.25)", "pow(subexp(1),2.5)", "prod(factorial,poly(1,1))", "sum(1,subexp(0.5),2,subfact(1))"] {
            assert_eq!(g(s).to_string(), s);
            assert_eq!(g(&g(s).to_string()), g(s));
        }
    }

    #[test]
    fn monotone_on_long_range() {
        for s in ["poly(1,1)", "poly(2,0,0,1)", "subexp(0.3)", "subexp(1)", "factorial", "subfact(0.3)", "subfact(1)", "pow(subfact(0.7),0.5)", "sum(1,poly(1,1),5,subexp(0.2))"] {
            let t = g(s).ln_table(10_000);
            assert!(t[0] >= 0.0);
            assert!(t.windows(2).all(|w| w[0] <= w[1]), "{s} not monotone");
        }
    }

    proptest! {
        #[test]
        fn values_are_at_least_one(theta in 0.01f64..=1.0, n in 0u64..100_000) {
            prop_assert!(GrowthFunction::SubExponential(theta).ln_value(n) >= 0.0);
            prop_assert!(GrowthFunction::SubFactorial(theta).ln_value(n) >= 0.0);
        }

        #[test]
        fn power_scales_logs(d in 0.1f64..10.0, n in 0u64..1000) {
            let base = GrowthFunction::linear();
            let p = GrowthFunction::Power(Box::new(base.clone()), d);
            prop_assert!((p.ln_value(n) - d * base.ln_value(n)).abs() <= 1e-12 * (1.0 + p.ln_value(n)));
        }
    }
}
